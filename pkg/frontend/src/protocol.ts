/**
 * Wire types for the annotation service.
 *
 * These mirror the JSON the server emits; nothing here is computed in the
 * browser. In particular `EditOp[]` scripts arrive ready-made: the client
 * renders them and never diffs text itself, so both sides of the socket
 * always agree on what changed.
 */

/** One recognized word with its utterance-relative timing. */
export interface TokenJson {
  text: string;
  /** Milliseconds from the start of the session clock. */
  start_ms: number;
  end_ms: number;
}

/** A recognizer result. Partials are provisional; finals are immutable. */
export interface AsrEventJson {
  kind: 'partial' | 'final';
  /** Groups the partials that led up to one final. */
  utterance_id: number;
  text: string;
  tokens: TokenJson[];
}

/** Document text plus the (anchor, focus) selection. */
export interface DocStateJson {
  content: string;
  selection: [number, number];
}

/** One step of a character edit script, in source order. */
export type EditOp =
  | { retain: number }
  | { delete: number }
  | { insert: string };

/** A problem the server wants the annotator to resolve before submit. */
export interface FlagJson {
  /** Index of the offending segment. */
  segment: number;
  code: 'stage-error' | 'no-op';
  message: string;
}

/** One folded op in the command log: dictation or a voice command. */
export interface SegmentJson {
  index: number;
  kind: 'dictation' | 'command';
  token_start: number;
  token_end: number;
  start_ms: number;
  end_ms: number;
  /** Raw ASR text for the segment. */
  text: string;
  pre_state: DocStateJson;
  post_state: DocStateJson;
  tag_logprob: number;
  /** Gold ASR: the annotator-corrected utterance, commands only. */
  normalized: string | null;
  norm_logprob: number;
  /** Interpreted editing program, when one was derived. */
  program: string | null;
  interp_logprob: number;
  error: string | null;
  /** True when the post-state was assigned by hand. */
  overridden: boolean;
  confidence: number;
  /** Server-computed pre -> post script for this segment. */
  diff: EditOp[];
  flags: FlagJson[];
}

/** Full session view; the client redraws everything from one of these. */
export interface SnapshotJson {
  type: 'snapshot';
  seq: number;
  task: string;
  initial_state: DocStateJson;
  n_events: number;
  transcript: string;
  visible_state: DocStateJson;
  /** Initial -> visible script (everything done so far). */
  diff: EditOp[];
  /** Verbatim replication target, '' for free-form prompts. */
  target: string;
  /** Visible -> target script, or null when there is no target. */
  target_diff: EditOp[] | null;
  segments: SegmentJson[];
  flags: FlagJson[];
  can_submit: boolean;
  /** key_down time of an unclosed hold, else null. */
  open_hold: number | null;
}

export interface ErrorJson {
  type: 'error';
  seq: number;
  message: string;
}

export interface SubmittedJson {
  type: 'submitted';
  seq: number;
  name: string;
  path: string;
  segments: number;
}

export type ServerMessage = SnapshotJson | ErrorJson | SubmittedJson;

/** Client -> server messages, one per user action. */
export type ClientMessage =
  | { type: 'sync' }
  | { type: 'asr_event'; event: AsrEventJson }
  | { type: 'key_down'; t_ms: number }
  | { type: 'key_up'; t_ms: number }
  | { type: 'set_gold_normalization'; start_ms: number; text: string }
  | { type: 'set_post_state'; start_ms: number; content: string }
  | { type: 'truncate_from'; start_ms: number }
  | { type: 'reset'; task?: string; initial_content?: string; target_content?: string }
  | { type: 'submit'; name: string };

/** A prompt the annotator works from, fetched over REST. */
export interface PromptJson {
  id: string;
  task: string;
  initial_content: string;
  /** Empty for free-form prompts; otherwise replicate this verbatim. */
  target_content: string;
}
