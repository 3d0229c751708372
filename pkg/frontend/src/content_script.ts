// Content script: scrape the page into a page document, ask the background
// worker for an outcome, render it. All decisions happen elsewhere.

import type { AdapterRules } from "./extract";
import { extractPagedoc } from "./extract";
import { applyOutcome } from "./apply";
import type { OutcomeWire } from "./wire";
import googleSerpRules from "./adapters/google_serp.json";
import amazonSearchRules from "./adapters/amazon_search.json";
import amazonProductRules from "./adapters/amazon_product.json";

const GOOGLE_SERP = googleSerpRules as AdapterRules;
const AMAZON_SEARCH = amazonSearchRules as AdapterRules;
const AMAZON_PRODUCT = amazonProductRules as AdapterRules;

export function adapterForLocation(loc: Pick<Location, "hostname" | "pathname">): AdapterRules | null {
  const host = loc.hostname;
  if ((host === "www.google.com" || host === "google.com") && loc.pathname === "/search") {
    return GOOGLE_SERP;
  }
  if (host === "www.amazon.com" || host === "amazon.com") {
    if (loc.pathname === "/s") {
      return AMAZON_SEARCH;
    }
    if (loc.pathname.includes("/dp/")) {
      return AMAZON_PRODUCT;
    }
  }
  return null;
}

interface OutcomeReply {
  type: "outcome";
  outcome: OutcomeWire | null;
}

function run(): void {
  const rules = adapterForLocation(window.location);
  if (rules === null) {
    return;
  }
  const { pagedoc, nodes } = extractPagedoc(document, rules);
  chrome.runtime.sendMessage(
    { type: "pagedoc", pagedoc },
    (reply: OutcomeReply | undefined) => {
      if (chrome.runtime.lastError !== undefined || reply === undefined || reply.outcome === null) {
        return;
      }
      const summary = applyOutcome(document, reply.outcome, nodes);
      if (summary.badgeText !== null) {
        chrome.runtime.sendMessage({ type: "badge", text: summary.badgeText });
      }
    },
  );
}

if (typeof chrome !== "undefined" && chrome.runtime !== undefined) {
  run();
}
