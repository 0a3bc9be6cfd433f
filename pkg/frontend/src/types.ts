/** REST schema types for the review service (the only backend coupling). */

export type Role = "operator" | "specialist";

export type Trajectory = "VERTICAL" | "HORIZONTAL" | "DIAGONAL_1" | "DIAGONAL_2";

export type StudyStatus =
  | "UPLOADED"
  | "QUEUED"
  | "PROCESSING"
  | "PROCESSED"
  | "FAILED"
  | "REVIEWED";

export type PlaneLabel = "AC" | "BPD" | "HS" | "SS" | "FL";

export const PLANE_LABELS: PlaneLabel[] = ["AC", "BPD", "HS", "SS", "FL"];

export const TRAJECTORIES: Trajectory[] = [
  "VERTICAL",
  "HORIZONTAL",
  "DIAGONAL_1",
  "DIAGONAL_2",
];

export interface RunSpan {
  start: number;
  end: number;
  peak_index: number;
  peak_confidence: number;
}

export interface KeyFrame {
  frame_index: number;
  label: PlaneLabel;
  confidence: number;
  run: RunSpan;
}

export interface StudyResult {
  schema: string;
  source_id: string;
  frame_count: number;
  backend: string;
  label_counts: Record<PlaneLabel, number>;
  keyframes: KeyFrame[];
  predictions: { frame_index: number; probs: number[] }[];
  config: {
    min_confidence: number;
    max_gap: number;
    max_per_label: number;
    dedup_ssim: number;
  };
}

export type Verdict = { verdict: "CONFIRMED"; count: number } | { verdict: "NOT_PRESENT" };

export interface ReviewReport {
  reviewer_id: string;
  verdicts: Record<PlaneLabel, Verdict>;
  feedback: string;
  reviewed_at: string;
}

export interface Study {
  id: string;
  operator_id: string;
  trajectory: Trajectory;
  video_ref: string;
  status: StudyStatus;
  result: StudyResult | null;
  review: ReviewReport | null;
  error: { code: string; message: string } | null;
  created_at: string;
  updated_at: string;
}

export interface Health {
  status: string;
  queue_depth: number;
  worker_count: number;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  study_id?: string;
}

export interface ReviewSubmission {
  verdicts: Record<PlaneLabel, Verdict>;
  feedback: string;
}
