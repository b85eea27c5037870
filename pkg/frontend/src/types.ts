// Wire types mirroring the audit service JSON bodies verbatim.

export type Verdict = "unreviewed" | "political" | "non_political" | "unsure";
export type Label = "political" | "non_political" | "unsure";

export interface Flag {
  ad_id: string;
  score: number;
  model_id: string;
  verdict: Verdict;
  reviewer: string | null;
  reviewed_at: string | null;
}

export interface AdRecord {
  id: string;
  advertiser_id: string;
  advertiser_name: string;
  text: string;
  disclaimer: string | null;
  landing_url: string | null;
  first_seen: string;
  last_seen: string;
  language: string | null;
  source: "collector" | "ad_library";
  declared_political: boolean;
  media_refs: string[];
}

export interface Page<T> {
  total: number;
  limit?: number;
  offset?: number;
  items: T[];
}

export interface LabelEvent {
  ad_id: string;
  annotator: string;
  label: Label;
  at: string;
}

export interface AgreementReport {
  kappa: number;
  agreement_pct: number;
  counts: Record<string, number>;
  landis_koch_band: string;
  items: number;
  annotators: string[];
}

export interface Health {
  version: string;
  collector_ads: number;
  declared_ads: number;
  model: string | null;
  threshold: number | null;
}

export interface ScoreResponse {
  probability: number;
  flagged: boolean | null;
}

/** One flagged ad joined with its record for review. The score is kept
 * exactly as the API sent it; rounding happens only at render time. */
export interface TriageItem {
  ad_id: string;
  score: number;
  model_id: string;
  verdict: Verdict;
  reviewer: string | null;
  text: string;
  advertiser_name: string;
  disclaimer: string | null;
}

export interface Tallies {
  confirmed: number; // verdict political
  rejected: number; // verdict non_political
  unsure: number;
}
