// Thin typed client for the engine's HTTP API. The player never talks
// to model providers directly; everything goes through these endpoints.

import type {
  AnswerReply,
  EventKind,
  Manifest,
  PodcastRequest,
  PodcastScript,
  QuestionOrigin,
  StorySummary,
} from './types.js';

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function expectJson<T>(response: Response): Promise<T> {
  if (!response.ok) {
    const body = await response.text();
    throw new ApiError(response.status, `${response.status}: ${body}`);
  }
  return response.json() as Promise<T>;
}

export class PodcastApi {
  constructor(private baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/$/, '');
  }

  async listStories(): Promise<StorySummary[]> {
    return expectJson(await fetch(`${this.baseUrl}/v1/stories`));
  }

  async createPodcast(request: PodcastRequest): Promise<string> {
    const response = await fetch(`${this.baseUrl}/v1/podcasts`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(request),
    });
    const body = await expectJson<{ podcast_id: string }>(response);
    return body.podcast_id;
  }

  async getManifest(podcastId: string): Promise<Manifest> {
    return expectJson(await fetch(`${this.baseUrl}/v1/podcasts/${podcastId}/manifest`));
  }

  async getScript(podcastId: string): Promise<PodcastScript> {
    return expectJson(await fetch(`${this.baseUrl}/v1/podcasts/${podcastId}/script`));
  }

  audioUrl(podcastId: string, lineId: string): string {
    return `${this.baseUrl}/v1/podcasts/${podcastId}/audio/${lineId}`;
  }

  async askQuestion(
    podcastId: string,
    segmentId: string,
    text: string,
    atLine: string,
    origin: QuestionOrigin,
  ): Promise<AnswerReply> {
    const response = await fetch(`${this.baseUrl}/v1/podcasts/${podcastId}/questions`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ segment_id: segmentId, text, at_line: atLine, origin }),
    });
    return expectJson(response);
  }

  async postEvent(podcastId: string, kind: EventKind, atLine: string): Promise<void> {
    const response = await fetch(`${this.baseUrl}/v1/podcasts/${podcastId}/events`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ kind, at_line: atLine }),
    });
    if (!response.ok) {
      throw new ApiError(response.status, `event post failed: ${response.status}`);
    }
  }

  async getEvents(podcastId: string): Promise<Array<{ kind: EventKind; at_line: string }>> {
    return expectJson(await fetch(`${this.baseUrl}/v1/podcasts/${podcastId}/events`));
  }
}
