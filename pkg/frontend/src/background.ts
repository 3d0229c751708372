// Background worker: owns user state, the campaign cache, and pending
// metrics. Routes page documents to the engine port and outcomes back to
// the content script; flushes folded metrics batches to the registry.

import { enginePort } from "./engine_port";
import {
  acknowledgeBatch,
  buildBatch,
  recordEvents,
  type PendingEvents,
} from "./metrics";
import { RegistryClient } from "./registry";
import { newInstall, parseUserState, serializeUserState } from "./state";
import type { CampaignWire, OutcomeWire, PageDocWire } from "./wire";

export const REGISTRY_URL = "http://127.0.0.1:8400";

const CAMPAIGN_SYNC_ALARM = "campaign-sync";
const METRICS_FLUSH_ALARM = "metrics-flush";

const client = new RegistryClient(REGISTRY_URL);

async function loadUserStateJson(): Promise<string> {
  const stored = await chrome.storage.local.get("user_state");
  const raw = stored["user_state"];
  if (typeof raw === "string") {
    parseUserState(raw); // reject corrupt state early
    return raw;
  }
  const fresh = serializeUserState(newInstall());
  await chrome.storage.local.set({ user_state: fresh });
  return fresh;
}

async function loadCampaigns(): Promise<CampaignWire[]> {
  const stored = await chrome.storage.local.get("campaign_cache");
  const cached = stored["campaign_cache"];
  return Array.isArray(cached) ? (cached as CampaignWire[]) : [];
}

async function syncCampaigns(): Promise<void> {
  const listing = await client.listCampaigns();
  await chrome.storage.local.set({
    campaign_cache: listing.campaigns,
    dataset_version: listing.dataset_version,
  });
}

async function loadPending(): Promise<PendingEvents> {
  const stored = await chrome.storage.local.get("pending_events");
  const pending = stored["pending_events"];
  return typeof pending === "object" && pending !== null ? (pending as PendingEvents) : {};
}

async function handlePagedoc(pagedoc: PageDocWire): Promise<OutcomeWire | null> {
  const port = enginePort();
  if (port === null) {
    return null;
  }
  const [stateJson, campaigns] = await Promise.all([loadUserStateJson(), loadCampaigns()]);
  const outcome = port.applyToPage(pagedoc, stateJson, campaigns, new Date().toISOString());
  if (outcome.events.length > 0) {
    const pending = recordEvents(await loadPending(), outcome.events);
    await chrome.storage.local.set({ pending_events: pending });
  }
  return outcome;
}

async function flushMetrics(): Promise<void> {
  const stateJson = await loadUserStateJson();
  const state = parseUserState(stateJson);
  const pending = await loadPending();
  const { batch, sentKeys } = buildBatch(pending, state.install_id, new Date(), state.priorities);
  if (batch === null) {
    return;
  }
  await client.postMetrics(batch);
  await chrome.storage.local.set({ pending_events: acknowledgeBatch(pending, sentKeys) });
}

export function wireBackground(): void {
  chrome.runtime.onInstalled.addListener(() => {
    chrome.alarms.create(CAMPAIGN_SYNC_ALARM, { periodInMinutes: 360 });
    chrome.alarms.create(METRICS_FLUSH_ALARM, { periodInMinutes: 30 });
    void syncCampaigns().catch(() => undefined);
  });

  chrome.alarms.onAlarm.addListener((alarm) => {
    if (alarm.name === CAMPAIGN_SYNC_ALARM) {
      void syncCampaigns().catch(() => undefined);
    } else if (alarm.name === METRICS_FLUSH_ALARM) {
      void flushMetrics().catch(() => undefined);
    }
  });

  chrome.runtime.onMessage.addListener((message, sender, sendResponse) => {
    const kind = (message as { type?: string }).type;
    if (kind === "pagedoc") {
      const { pagedoc } = message as { pagedoc: PageDocWire };
      void handlePagedoc(pagedoc).then((outcome) => sendResponse({ type: "outcome", outcome }));
      return true; // async response
    }
    if (kind === "badge") {
      const { text } = message as { text: string };
      const tabId = sender.tab?.id;
      if (tabId !== undefined) {
        void chrome.action.setBadgeText({ tabId, text });
      }
    }
    return false;
  });
}

if (typeof chrome !== "undefined" && chrome.runtime !== undefined) {
  wireBackground();
}
