// Popup: show enrolled campaigns with their contribution counters and a
// share composer. Counters come from the local metrics fold plus registry
// stats; the share text is the engine's exact template.

import { buildShareMessage, contributionSummary, contributionTotal } from "./metrics";
import type { PendingEvents } from "./metrics";
import { RegistryClient } from "./registry";
import { parseUserState } from "./state";
import { REGISTRY_URL } from "./background";
import type { CampaignWire, EventWire } from "./wire";

const client = new RegistryClient(REGISTRY_URL);

function campaignRow(doc: Document, campaign: CampaignWire, events: EventWire[]): HTMLElement {
  const summary = contributionSummary(events, campaign.id);
  const row = doc.createElement("div");
  row.className = "campaign-row";

  const title = doc.createElement("h2");
  title.textContent = campaign.name;
  row.appendChild(title);

  const counters = doc.createElement("p");
  counters.textContent =
    `${summary.results_altered} results altered, ` +
    `${summary.products_hidden} products hidden, ` +
    `${summary.visits_blocked} visits blocked`;
  row.appendChild(counters);

  const share = doc.createElement("button");
  share.textContent = "Share";
  share.addEventListener("click", () => {
    const message = buildShareMessage(
      campaign.name,
      contributionTotal(summary),
      campaign.homepage_url,
      campaign.homepage_url,
    );
    void navigator.clipboard.writeText(message);
    share.textContent = "Copied";
  });
  row.appendChild(share);

  const stats = doc.createElement("p");
  stats.className = "registry-stats";
  client
    .getStats(campaign.id)
    .then((s) => {
      stats.textContent = `${s.participants} participants so far`;
    })
    .catch(() => {
      stats.textContent = "";
    });
  row.appendChild(stats);

  return row;
}

async function render(): Promise<void> {
  const root = document.getElementById("campaigns");
  if (root === null) {
    return;
  }
  const stored = await chrome.storage.local.get(["user_state", "campaign_cache", "pending_events"]);
  const raw = stored["user_state"];
  if (typeof raw !== "string") {
    root.textContent = "No campaigns enrolled yet.";
    return;
  }
  const state = parseUserState(raw);
  const cache = Array.isArray(stored["campaign_cache"])
    ? (stored["campaign_cache"] as CampaignWire[])
    : [];
  const pending =
    typeof stored["pending_events"] === "object" && stored["pending_events"] !== null
      ? (stored["pending_events"] as PendingEvents)
      : {};
  const events = Object.values(pending);
  root.replaceChildren();
  for (const campaignId of state.priorities) {
    const campaign = cache.find((c) => c.id === campaignId);
    if (campaign !== undefined) {
      root.appendChild(campaignRow(document, campaign, events));
    }
  }
  if (root.childNodes.length === 0) {
    root.textContent = "No campaigns enrolled yet.";
  }
}

if (typeof chrome !== "undefined" && chrome.storage !== undefined) {
  void render();
}
