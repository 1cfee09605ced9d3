// Wire types mirroring the engine's manifest and script JSON schemas.

export type VoiceRole = 'V1' | 'V2' | 'V3' | 'none';

export type WaveColor = 'blue' | 'red' | 'green' | 'grey';

export interface StorySummary {
  story_id: string;
  title: string;
  n_articles: number;
}

export interface ManifestLine {
  line_id: string;
  unit_id: string;
  segment_id: string;
  sentence_index: number;
  text: string;
  voice_id: string;
  ssml: string;
  audio_ref: string;
  duration_ms: number;
}

export interface SegmentOffset {
  segment_id: string;
  first_line_index: number;
  start_ms: number;
}

export interface Manifest {
  podcast_id: string;
  lines: ManifestLine[];
  segment_offsets: SegmentOffset[];
  total_duration_ms: number;
}

export interface ScriptUnit {
  unit_id: string;
  kind: string;
  text: string;
  voice_role: VoiceRole;
  word_count: number;
  silence_ms?: number;
}

export interface SegmentScript {
  segment_id: string;
  story_id: string;
  title: string;
  condition: string;
  recommended_questions: string[];
  units: ScriptUnit[];
}

export interface PodcastScript {
  podcast_id: string;
  target_duration_s: number;
  with_breaks: boolean;
  greeting: ScriptUnit;
  closing: ScriptUnit;
  transitions: ScriptUnit[];
  segments: SegmentScript[];
}

export interface PodcastRequest {
  story_ids: string[];
  duration_s: number;
  condition: string;
  with_breaks: boolean;
  seed?: number;
}

export type QuestionOrigin = 'typed' | 'recommended' | 'spoken';

export interface AnswerReply {
  status: 'answered' | 'no_answer';
  answer_text: string | null;
  evidence_paragraph: string | null;
  reply_lines: ManifestLine[];
  resume_at_line: string;
  provider_error: boolean;
}

export type EventKind =
  | 'play'
  | 'pause'
  | 'skip'
  | 'seek'
  | 'transcript_open'
  | 'transcript_close'
  | 'question_asked';

export const END_OF_PODCAST = '__end_of_podcast__';
