// Page wiring: story picker, playback controls, sectioned progress bar,
// transcript panel, question input (typed, recommended, microphone).

import { PodcastApi } from './api.js';
import { PlayerCore, type AudioDriver } from './player.js';
import { Wave } from './wave.js';
import type { Manifest, ManifestLine, SegmentOffset } from './types.js';

const API_BASE = (window as any).NEWSPOD_API ?? 'http://127.0.0.1:8400';

class HtmlAudioDriver implements AudioDriver {
  private current: HTMLAudioElement | null = null;
  private settle: (() => void) | null = null;

  play(url: string, _line: ManifestLine): Promise<void> {
    this.stop();
    return new Promise((resolve, reject) => {
      const audio = new Audio(url);
      this.current = audio;
      this.settle = resolve;
      audio.onended = () => {
        this.settle = null;
        resolve();
      };
      audio.onerror = () => {
        this.settle = null;
        reject(new Error(`audio fetch failed: ${url}`));
      };
      void audio.play().catch(reject);
    });
  }

  stop(): void {
    if (this.current) {
      this.current.pause();
      this.current = null;
    }
    if (this.settle) {
      this.settle();
      this.settle = null;
    }
  }
}

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

function renderProgressBar(
  container: HTMLElement, manifest: Manifest, player: PlayerCore,
): () => void {
  container.innerHTML = '';
  const sections: HTMLElement[] = [];
  for (let i = 0; i < manifest.segment_offsets.length; i++) {
    const offset: SegmentOffset = manifest.segment_offsets[i];
    const next = manifest.segment_offsets[i + 1];
    const endMs = next ? next.start_ms : manifest.total_duration_ms;
    const section = document.createElement('button');
    section.className = 'progress-section';
    section.style.flexGrow = String(endMs - offset.start_ms);
    section.title = offset.segment_id;
    section.addEventListener('click', () => void player.seekSegment(i));
    container.appendChild(section);
    sections.push(section);
  }
  return () => {
    const active = player.currentSegmentIndex();
    sections.forEach((section, i) => {
      section.classList.toggle('active', i === active);
    });
  };
}

function renderRecommended(container: HTMLElement, player: PlayerCore): void {
  container.innerHTML = '';
  for (const question of player.recommendedQuestions()) {
    const button = document.createElement('button');
    button.className = 'recommended';
    button.textContent = question;
    button.addEventListener('click', () => void player.askQuestion(question, 'recommended'));
    container.appendChild(button);
  }
}

function setupMicrophone(button: HTMLButtonElement, player: PlayerCore): void {
  const Recognition =
    (window as any).SpeechRecognition ?? (window as any).webkitSpeechRecognition;
  if (!Recognition) {
    button.disabled = true;
    button.title = 'Speech recognition is not available in this browser';
    return;
  }
  button.addEventListener('click', () => {
    const recognition = new Recognition();
    recognition.lang = 'en-US';
    recognition.onresult = (event: any) => {
      const text = event.results[0][0].transcript;
      void player.askQuestion(text, 'spoken');
    };
    recognition.onerror = () => notice('Could not hear a question.');
    recognition.start();
    notice('Listening...');
  });
}

function notice(message: string): void {
  const bar = el<HTMLElement>('notice');
  bar.textContent = message;
  bar.classList.add('visible');
  window.setTimeout(() => bar.classList.remove('visible'), 4000);
}

async function buildPicker(api: PodcastApi): Promise<void> {
  const stories = await api.listStories();
  const list = el<HTMLElement>('story-list');
  for (const story of stories) {
    const label = document.createElement('label');
    const box = document.createElement('input');
    box.type = 'checkbox';
    box.value = story.story_id;
    label.appendChild(box);
    label.append(` ${story.title}`);
    list.appendChild(label);
  }

  el<HTMLButtonElement>('start').addEventListener('click', () => {
    const chosen = Array.from(
      list.querySelectorAll<HTMLInputElement>('input:checked'),
    ).map((box) => box.value);
    if (chosen.length === 0) {
      notice('Pick at least one story.');
      return;
    }
    const duration = Number(el<HTMLSelectElement>('duration').value);
    void startPlayer(api, chosen, duration);
  });
}

async function startPlayer(api: PodcastApi, storyIds: string[], durationS: number): Promise<void> {
  el<HTMLElement>('picker').hidden = true;
  el<HTMLElement>('player').hidden = false;
  notice('Generating your podcast...');

  const podcastId = await api.createPodcast({
    story_ids: storyIds,
    duration_s: durationS,
    condition: 'qa_best',
    with_breaks: true,
    seed: Math.floor(Math.random() * 1_000_000),
  });
  const [manifest, script] = await Promise.all([
    api.getManifest(podcastId),
    api.getScript(podcastId),
  ]);

  const transcriptPanel = el<HTMLElement>('transcript');
  const wave = new Wave(el<HTMLCanvasElement>('wave'));
  let updateProgress: () => void = () => undefined;

  const player = new PlayerCore(api, manifest, script, new HtmlAudioDriver(), {
    onLineStart: (line) => {
      if (line.text) {
        const sentence = document.createElement('p');
        sentence.textContent = line.text;
        transcriptPanel.appendChild(sentence);
        transcriptPanel.scrollTop = transcriptPanel.scrollHeight;
      }
      renderRecommended(el<HTMLElement>('recommended'), player);
    },
    onNotice: notice,
    onStateChange: (state) => {
      wave.setColor(state.waveColor);
      el<HTMLElement>('play').textContent = state.playing ? 'Pause' : 'Play';
      el<HTMLElement>('transcript-wrap').classList.toggle('open', state.transcriptOpen);
      updateProgress();
    },
  });

  updateProgress = renderProgressBar(el<HTMLElement>('progress'), manifest, player);
  renderRecommended(el<HTMLElement>('recommended'), player);

  el<HTMLButtonElement>('play').addEventListener('click', () => {
    void (player.state.playing ? player.pause() : player.play());
  });
  el<HTMLButtonElement>('back').addEventListener('click', () => void player.skipBackward());
  el<HTMLButtonElement>('forward').addEventListener('click', () => void player.skipForward());
  el<HTMLButtonElement>('toggle-transcript').addEventListener(
    'click', () => void player.toggleTranscript());
  el<HTMLButtonElement>('ask').addEventListener('click', () => {
    const input = el<HTMLInputElement>('question');
    void player.askQuestion(input.value, 'typed').then(() => {
      input.value = '';
    });
  });
  setupMicrophone(el<HTMLButtonElement>('mic'), player);

  notice('Ready. Press play.');
}

void buildPicker(new PodcastApi(API_BASE));
