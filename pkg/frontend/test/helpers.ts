import { readFileSync } from "node:fs";
import { JSDOM } from "jsdom";

import type { AdapterRules } from "../src/extract";
import type { OutcomeWire, PageDocWire } from "../src/wire";

import googleSerpRules from "../src/adapters/google_serp.json";
import amazonSearchRules from "../src/adapters/amazon_search.json";
import amazonProductRules from "../src/adapters/amazon_product.json";

export const GOOGLE_SERP = googleSerpRules as AdapterRules;
export const AMAZON_SEARCH = amazonSearchRules as AdapterRules;
export const AMAZON_PRODUCT = amazonProductRules as AdapterRules;

// Canonical page documents and outcome goldens live at the repository root;
// the HTML twins of the page documents live next to these tests.

export function loadCanonicalPagedoc(name: string): PageDocWire {
  const raw = readFileSync(new URL(`../../fixtures/${name}`, import.meta.url), "utf-8");
  return JSON.parse(raw) as PageDocWire;
}

export function loadOutcomeGolden(name: string): OutcomeWire {
  const raw = readFileSync(new URL(`../../fixtures/outcomes/${name}`, import.meta.url), "utf-8");
  return JSON.parse(raw) as OutcomeWire;
}

export function loadFixtureDom(htmlName: string, url: string): JSDOM {
  const html = readFileSync(new URL(`../fixtures/${htmlName}`, import.meta.url), "utf-8");
  return new JSDOM(html, { url });
}
