// Shapes of the review-service API documents. The UI renders these
// verbatim; it never computes statistics of its own.

export interface LoginResponse {
  token: string;
  role: string;
  expires_in_s: number;
}

export interface BoxDoc {
  min: number;
  q1: number;
  median: number;
  q3: number;
  max: number;
  mean: number;
  outliers: number[];
}

export interface SummaryDoc {
  group: string;
  kind: string;
  total: number;
  events: number;
  window: { dates: string[]; hours: number[] };
  matrix: { dates: string[]; hours: number[]; counts: number[][] };
  daily_totals: Record<string, number>;
  box: Record<string, BoxDoc>;
}

export type Verdict = "confirmed" | "false_positive" | "unsure";

export interface AnnotationDoc {
  event_id: string;
  verdict: Verdict;
  note: string;
  reviewer: string;
  ts: string;
}

export interface ClipDoc {
  source_uri: string;
  start_frame: number;
  end_frame: number;
  start_ts: string;
  end_ts: string;
  output_name: string;
  event_ids?: string[];
}

export interface EventRow {
  event_id: string;
  kind: string;
  camera_id: string;
  roi_group: string;
  date: string;
  hour: number;
  f_b: number;
  f_e: number;
  p: number;
  detection_count: number;
  t_b: string;
  t_e: string;
  position: [number, number];
  count: number;
  clip: ClipDoc | null;
  annotations: AnnotationDoc[];
}

export interface EventsDoc {
  events: EventRow[];
}

export interface CorrelationCellDoc {
  r: number | null;
  classification: string;
  reason: string | null;
}

export interface CorrelationDoc {
  hours: number[];
  rows: Record<string, Record<string, CorrelationCellDoc>>;
}

export interface ErrorDoc {
  code: string;
  message: string;
}
