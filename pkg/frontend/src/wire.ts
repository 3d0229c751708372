// JSON shapes shared with the engine and the registry. Field names and
// enum strings here are wire contract; do not rename casually.

export type Surface = "google_serp" | "amazon_search" | "navigation";

export type StrengthLevel = "High" | "Medium" | "Low";

export type ElementKind =
  | "organic_result"
  | "ad"
  | "knowledge_panel"
  | "local_map_entry"
  | "twitter_link"
  | "news_carousel_item"
  | "news_article"
  | "wikipedia_entry"
  | "third_party_commercial"
  | "amazon_product_card"
  | "other";

export interface PageElementWire {
  id: string;
  kind: ElementKind;
  text: string;
  urls: string[];
  rank: number;
}

export interface PageDocWire {
  surface: Surface;
  source_url: string;
  query: string | null;
  elements: PageElementWire[];
}

export type ActionKind =
  | "remove"
  | "move_to_bottom"
  | "overlay"
  | "annotate_cta"
  | "keep";

export interface ElementActionWire {
  element_id: string;
  kind: ActionKind;
  campaign_id?: string;
  target_label?: string;
  new_rank?: number;
  message_text?: string;
  prompt_text?: string;
  mailto_link?: string;
}

export type CueKind = "hidden_banner" | "whitelist_prompt" | "badge_count";

export interface DisclosureCueWire {
  kind: CueKind;
  text: string;
  related_targets: string[];
}

export interface EventWire {
  campaign_id: string;
  surface: Surface;
  intervention: string;
  // "navigation" stands in for element kind on navigation interruptions.
  element_kind: string;
  count: number;
  bucket_time: string;
}

export interface OutcomeWire {
  surface: Surface;
  page_actions: ElementActionWire[];
  injected_cues: DisclosureCueWire[];
  events: EventWire[];
  hidden_count: number;
}

export interface CampaignCtaWire {
  contact_email: string;
  prompt_text: string;
  email_subject: string;
  email_body: string;
}

export interface CampaignWire {
  id: string;
  name: string;
  homepage_url: string;
  keywords: string[];
  domains: string[];
  cta: CampaignCtaWire;
  policies: Record<string, Partial<Record<StrengthLevel, string>>>;
  category_tags: string[];
  review_status: string;
}

export interface CampaignListWire {
  dataset_version: number;
  campaigns: CampaignWire[];
}

export interface CampaignStatsWire {
  campaign_id: string;
  participants: number;
  visits_blocked: number;
  results_altered: number;
  products_hidden: number;
  seed_offsets: Record<string, number>;
}

export interface MetricsBatchWire {
  install_id: string;
  schema_version: number;
  sent_at: string;
  enrolled_campaigns?: string[];
  events: EventWire[];
}

export interface IngestAckWire {
  status: string;
  accepted: number;
  duplicates: number;
  dropped_unknown_campaign: number;
}
