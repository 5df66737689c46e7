/** Wire types for the /v1 gateway. Shapes mirror server responses exactly;
 * nothing here is computed client-side. */

export type ScopeKind = "global" | "topic" | "issue";

export interface DelegationScope {
  kind: ScopeKind;
  topic?: string;
  issue?: string;
}

export interface DelegationRow {
  source: string;
  target: string;
  scope: DelegationScope;
  created_at: string;
}

export interface DelegationList {
  delegations: DelegationRow[];
}

/** Where a delegation chain ends, as reported by the awareness endpoint. */
export type ChainTerminal =
  | "self"
  | "voter"
  | "dangling"
  | "abstaining_cycle"
  | "truncated"
  | "none";

export interface ChainReport {
  participant: string;
  issue: string;
  /** Participants the unit passes through, nearest first. Excludes the owner. */
  hops: string[];
  terminal: ChainTerminal;
  /** Who ends up holding the ballot, or null when the unit abstains. */
  resolved_to: string | null;
}

export interface VoteReceipt {
  issue: string;
  participant: string;
  options: string[];
}

/** Error envelope every non-2xx response carries. */
export interface ApiError {
  error: string;
}

export interface SurveyReceipt {
  instance: string;
  participant: string;
}

export interface QuestionAggregate {
  kind: string;
  count: number;
  mean?: number;
  median?: number;
  counts?: Record<string, number>;
}

export interface SurveyResults {
  instance: string;
  series: string;
  opens: string;
  closes: string;
  eligible: number;
  responses: number;
  questions: Record<string, QuestionAggregate>;
}

/** Outcome of a survey submission: the receipt, or the server's refusal. */
export type SurveyOutcome =
  | { ok: true; receipt: SurveyReceipt }
  | { ok: false; status: number; error: ApiError };
