// Client-side metrics bookkeeping: fold engine events into hourly pending
// counters, emit upload batches for closed buckets only, and keep the local
// contribution totals the popup displays. Counter routing matches the
// registry: navigation -> visits_blocked, amazon filter -> products_hidden,
// everything else -> results_altered.

import type { EventWire, MetricsBatchWire } from "./wire";

export const METRICS_SCHEMA_VERSION = 1;
export const BATCH_SPAN_LIMIT_HOURS = 24;

export const SHARE_TEMPLATE =
  "I boycotted {n} websites to support #{campaign_hashtag} using Out of Site " +
  "(a Chrome extension). Join me now: {join_url}. " +
  "Read about the campaign: {info_url}.";

export type CounterField = "visits_blocked" | "results_altered" | "products_hidden";

export interface ContributionSummary {
  campaign_id: string;
  visits_blocked: number;
  results_altered: number;
  products_hidden: number;
}

export function counterField(event: Pick<EventWire, "surface" | "intervention">): CounterField {
  if (event.surface === "navigation") {
    return "visits_blocked";
  }
  if (event.surface === "amazon_search" && event.intervention === "filter") {
    return "products_hidden";
  }
  return "results_altered";
}

export function contributionSummary(events: EventWire[], campaignId: string): ContributionSummary {
  const summary: ContributionSummary = {
    campaign_id: campaignId,
    visits_blocked: 0,
    results_altered: 0,
    products_hidden: 0,
  };
  for (const event of events) {
    if (event.campaign_id === campaignId) {
      summary[counterField(event)] += event.count;
    }
  }
  return summary;
}

export function contributionTotal(summary: ContributionSummary): number {
  return summary.visits_blocked + summary.results_altered + summary.products_hidden;
}

export function campaignHashtag(name: string): string {
  return name.split(/\s+/).filter((part) => part !== "").join("");
}

export function buildShareMessage(
  campaignName: string,
  n: number,
  joinUrl: string,
  infoUrl: string,
): string {
  if (n < 0) {
    throw new RangeError("contribution count must be non-negative");
  }
  return SHARE_TEMPLATE.replace("{n}", String(n))
    .replace("{campaign_hashtag}", campaignHashtag(campaignName))
    .replace("{join_url}", joinUrl)
    .replace("{info_url}", infoUrl);
}

// Pending counters keyed by (bucket_time, campaign, surface, intervention,
// element_kind). The registry deduplicates per key, so the client folds
// before upload: two raw events with one key must reach the server as a
// single summed row or the second count is lost.

export type PendingEvents = Record<string, EventWire>;

export function eventKey(event: EventWire): string {
  return [
    event.bucket_time,
    event.campaign_id,
    event.surface,
    event.intervention,
    event.element_kind,
  ].join("|");
}

export function recordEvents(pending: PendingEvents, events: EventWire[]): PendingEvents {
  const next: PendingEvents = { ...pending };
  for (const event of events) {
    const key = eventKey(event);
    const existing = next[key];
    next[key] = existing === undefined
      ? { ...event }
      : { ...existing, count: existing.count + event.count };
  }
  return next;
}

export function floorToHourIso(now: Date): string {
  const floored = new Date(now.getTime());
  floored.setUTCMinutes(0, 0, 0);
  return floored.toISOString().replace(".000Z", "Z");
}

function rfc3339(now: Date): string {
  return new Date(Math.floor(now.getTime() / 1000) * 1000)
    .toISOString()
    .replace(".000Z", "Z");
}

function addHoursIso(bucketIso: string, hours: number): string {
  const t = new Date(bucketIso);
  t.setUTCHours(t.getUTCHours() + hours);
  return t.toISOString().replace(".000Z", "Z");
}

export interface BatchBuild {
  batch: MetricsBatchWire | null;
  // Keys included in the batch; pass to acknowledgeBatch once the upload
  // is confirmed. Open buckets stay pending so duplicate deliveries can
  // never disagree on a key's count.
  sentKeys: string[];
}

export function buildBatch(
  pending: PendingEvents,
  installId: string,
  now: Date,
  enrolledCampaigns: string[] = [],
): BatchBuild {
  const horizon = floorToHourIso(now);
  const closed = Object.entries(pending).filter(([, e]) => e.bucket_time < horizon);
  if (closed.length === 0) {
    return { batch: null, sentKeys: [] };
  }
  const earliest = closed.map(([, e]) => e.bucket_time).sort()[0]!;
  const windowEnd = addHoursIso(earliest, BATCH_SPAN_LIMIT_HOURS);
  const inWindow = closed.filter(([, e]) => e.bucket_time < windowEnd);
  const batch: MetricsBatchWire = {
    install_id: installId,
    schema_version: METRICS_SCHEMA_VERSION,
    sent_at: rfc3339(now),
    events: inWindow.map(([, e]) => ({ ...e })),
  };
  if (enrolledCampaigns.length > 0) {
    batch.enrolled_campaigns = [...enrolledCampaigns];
  }
  return { batch, sentKeys: inWindow.map(([key]) => key) };
}

export function acknowledgeBatch(pending: PendingEvents, sentKeys: string[]): PendingEvents {
  const next: PendingEvents = { ...pending };
  for (const key of sentKeys) {
    delete next[key];
  }
  return next;
}
