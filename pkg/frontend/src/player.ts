// Playback engine. Owns the player state machine and the transcript;
// knows nothing about the DOM. The page wires it to real <audio>
// playback, tests wire it to a fake driver, and both get identical
// behavior because all sequencing lives here.

import { ApiError } from './api.js';
import {
  END_OF_PODCAST,
  type AnswerReply,
  type EventKind,
  type Manifest,
  type ManifestLine,
  type PodcastScript,
  type QuestionOrigin,
  type VoiceRole,
  type WaveColor,
} from './types.js';

export interface AudioDriver {
  // Resolves when the line finishes playing, or promptly after stop().
  play(url: string, line: ManifestLine): Promise<void>;
  stop(): void;
}

// The slice of the HTTP client the player needs; PodcastApi satisfies it.
export interface PlayerApi {
  audioUrl(podcastId: string, lineId: string): string;
  askQuestion(
    podcastId: string,
    segmentId: string,
    text: string,
    atLine: string,
    origin: QuestionOrigin,
  ): Promise<AnswerReply>;
  postEvent(podcastId: string, kind: EventKind, atLine: string): Promise<void>;
}

export function colorForRole(role: VoiceRole, playing: boolean): WaveColor {
  if (!playing) return 'grey';
  switch (role) {
    case 'V1':
      return 'blue';
    case 'V2':
      return 'red';
    case 'V3':
      return 'green';
    default:
      return 'grey';
  }
}

export interface PlayerState {
  currentLine: string | null;
  playing: boolean;
  transcriptOpen: boolean;
  pendingQuestion: { text: string; origin: QuestionOrigin } | null;
  waveColor: WaveColor;
  finished: boolean;
}

export interface PlayerHooks {
  onLineStart?: (line: ManifestLine) => void;
  onNotice?: (message: string) => void;
  onStateChange?: (state: PlayerState) => void;
  onReply?: (reply: AnswerReply) => void;
}

export class PlayerCore {
  readonly state: PlayerState = {
    currentLine: null,
    playing: false,
    transcriptOpen: false,
    pendingQuestion: null,
    waveColor: 'grey',
    finished: false,
  };

  // Text of every line that started playing, in order (silence lines
  // contribute empty strings). The transcript panel renders exactly this.
  readonly playedTexts: string[] = [];
  readonly playedLineIds: string[] = [];

  private lineIndex = 0;
  private epoch = 0;
  private lastStartedLineId: string | null = null;
  private roleByUnit = new Map<string, VoiceRole>();
  private loopDone: Promise<void> = Promise.resolve();

  constructor(
    private api: PlayerApi,
    readonly manifest: Manifest,
    readonly script: PodcastScript,
    private driver: AudioDriver,
    private hooks: PlayerHooks = {},
  ) {
    for (const segment of script.segments) {
      for (const unit of segment.units) {
        this.roleByUnit.set(unit.unit_id, unit.voice_role);
      }
    }
    this.roleByUnit.set(script.greeting.unit_id, script.greeting.voice_role);
    this.roleByUnit.set(script.closing.unit_id, script.closing.voice_role);
    for (const transition of script.transitions) {
      this.roleByUnit.set(transition.unit_id, transition.voice_role);
    }
    if (manifest.lines.length > 0) {
      this.state.currentLine = manifest.lines[0].line_id;
    }
  }

  roleForLine(line: ManifestLine): VoiceRole {
    return this.roleByUnit.get(line.unit_id) ?? 'V1';
  }

  segmentCount(): number {
    return this.manifest.segment_offsets.length;
  }

  currentSegmentIndex(): number {
    let index = 0;
    for (let i = 0; i < this.manifest.segment_offsets.length; i++) {
      if (this.manifest.segment_offsets[i].first_line_index <= this.lineIndex) {
        index = i;
      }
    }
    return index;
  }

  recommendedQuestions(): string[] {
    const segmentId = this.manifest.segment_offsets[this.currentSegmentIndex()].segment_id;
    const segment = this.script.segments.find((s) => s.segment_id === segmentId);
    return segment ? segment.recommended_questions : [];
  }

  // Wait for the current playback loop to settle; test hook.
  async idle(): Promise<void> {
    await this.loopDone;
  }

  private changed(): void {
    this.hooks.onStateChange?.(this.state);
  }

  private notice(message: string): void {
    this.hooks.onNotice?.(message);
  }

  private setWaveFor(line: ManifestLine | null): void {
    this.state.waveColor = line
      ? colorForRole(this.roleForLine(line), this.state.playing)
      : colorForRole('none', false);
  }

  // -- playback ------------------------------------------------------------

  async play(): Promise<void> {
    if (this.state.playing || this.state.finished) return;
    this.state.playing = true;
    await this.api.postEvent(this.manifest.podcast_id, 'play', this.state.currentLine ?? '');
    this.runLoop();
    this.changed();
  }

  async pause(): Promise<void> {
    if (!this.state.playing) return;
    this.stopPlayback();
    await this.api.postEvent(this.manifest.podcast_id, 'pause', this.state.currentLine ?? '');
    this.changed();
  }

  private stopPlayback(): void {
    this.state.playing = false;
    this.epoch++;
    this.driver.stop();
    this.state.waveColor = 'grey';
  }

  private runLoop(): void {
    const myEpoch = ++this.epoch;
    this.loopDone = (async () => {
      while (this.state.playing && this.lineIndex < this.manifest.lines.length) {
        const line = this.manifest.lines[this.lineIndex];
        this.state.currentLine = line.line_id;
        this.setWaveFor(line);
        if (this.lastStartedLineId !== line.line_id) {
          this.lastStartedLineId = line.line_id;
          this.playedTexts.push(line.text);
          this.playedLineIds.push(line.line_id);
          this.hooks.onLineStart?.(line);
        }
        this.changed();
        try {
          await this.driver.play(
            this.api.audioUrl(this.manifest.podcast_id, line.line_id), line);
        } catch (error) {
          this.notice(`Audio failed for a line; skipping. (${String(error)})`);
        }
        if (this.epoch !== myEpoch || !this.state.playing) return;
        this.lineIndex++;
      }
      if (this.epoch === myEpoch && this.lineIndex >= this.manifest.lines.length) {
        this.state.playing = false;
        this.state.finished = true;
        this.state.waveColor = 'grey';
        this.changed();
      }
    })();
  }

  // -- seeking -------------------------------------------------------------

  private jumpToSegment(index: number): void {
    const offset = this.manifest.segment_offsets[index];
    this.epoch++;
    this.driver.stop();
    this.lineIndex = offset.first_line_index;
    this.lastStartedLineId = null;
    this.state.finished = false;
    this.state.currentLine = this.manifest.lines[this.lineIndex].line_id;
    if (this.state.playing) {
      this.runLoop();
    }
    this.changed();
  }

  async seekSegment(index: number): Promise<void> {
    if (index < 0 || index >= this.segmentCount()) {
      this.notice(`No segment ${index}.`);
      return;
    }
    this.jumpToSegment(index);
    await this.api.postEvent(
      this.manifest.podcast_id, 'seek', this.state.currentLine ?? '');
  }

  async skipForward(): Promise<void> {
    const next = Math.min(this.currentSegmentIndex() + 1, this.segmentCount() - 1);
    this.jumpToSegment(next);
    await this.api.postEvent(
      this.manifest.podcast_id, 'skip', this.state.currentLine ?? '');
  }

  async skipBackward(): Promise<void> {
    const previous = Math.max(this.currentSegmentIndex() - 1, 0);
    this.jumpToSegment(previous);
    await this.api.postEvent(
      this.manifest.podcast_id, 'skip', this.state.currentLine ?? '');
  }

  // -- transcript ----------------------------------------------------------

  async toggleTranscript(): Promise<void> {
    this.state.transcriptOpen = !this.state.transcriptOpen;
    await this.api.postEvent(
      this.manifest.podcast_id,
      this.state.transcriptOpen ? 'transcript_open' : 'transcript_close',
      this.state.currentLine ?? '');
    this.changed();
  }

  // -- live questions --------------------------------------------------------

  async askQuestion(text: string, origin: QuestionOrigin): Promise<AnswerReply | null> {
    if (this.state.pendingQuestion) {
      this.notice('A question is already being processed.');
      return null;
    }
    if (!text.trim()) {
      this.notice('Type a question first.');
      return null;
    }

    const askedAt = this.state.currentLine ?? this.manifest.lines[0].line_id;
    const segmentId = this.manifest.segment_offsets[this.currentSegmentIndex()].segment_id;
    const wasPlaying = this.state.playing;

    this.state.pendingQuestion = { text, origin };
    if (wasPlaying) {
      // Asking pauses playback; the question POST is this action's one
      // event, so no separate pause event is logged.
      this.stopPlayback();
    }
    this.changed();

    let reply: AnswerReply;
    try {
      reply = await this.api.askQuestion(
        this.manifest.podcast_id, segmentId, text, askedAt, origin);
    } catch (error) {
      this.state.pendingQuestion = null;
      if (error instanceof ApiError && error.status === 409) {
        this.notice('The podcast is still answering another question.');
      } else {
        this.notice(`Question failed: ${String(error)}`);
      }
      if (wasPlaying) {
        this.state.playing = true;
        this.runLoop();
      }
      this.changed();
      return null;
    }

    this.hooks.onReply?.(reply);

    // Voice 1 reads the reply before the podcast resumes.
    for (const line of reply.reply_lines) {
      this.state.currentLine = line.line_id;
      this.state.waveColor = 'blue';
      this.playedTexts.push(line.text);
      this.playedLineIds.push(line.line_id);
      this.hooks.onLineStart?.(line);
      this.changed();
      try {
        await this.driver.play(
          this.api.audioUrl(this.manifest.podcast_id, line.line_id), line);
      } catch (error) {
        this.notice(`Audio failed for a reply line; skipping. (${String(error)})`);
      }
    }

    this.state.pendingQuestion = null;
    if (reply.resume_at_line === END_OF_PODCAST) {
      this.state.playing = false;
      this.state.finished = true;
      this.state.waveColor = 'grey';
      this.changed();
      return reply;
    }

    const resumeIndex = this.manifest.lines.findIndex(
      (line) => line.line_id === reply.resume_at_line);
    if (resumeIndex >= 0) {
      this.lineIndex = resumeIndex;
      this.lastStartedLineId = null;
      this.state.currentLine = reply.resume_at_line;
    }
    this.state.playing = true;
    this.runLoop();
    this.changed();
    return reply;
  }
}
