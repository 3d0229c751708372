// DOM scraping: turn a live page into the page document the engine consumes.
// Selector sets live in data files under src/adapters/ so they can be updated
// when a site changes markup without touching code.

import type { ElementKind, PageDocWire, PageElementWire, Surface } from "./wire";

export interface ElementRule {
  kind: ElementKind;
  selector: string;
}

export interface AdapterRules {
  surface: Surface;
  id_prefix: string;
  // CSS selector for the search box; absent on pages with no query.
  query_selector?: string;
  element_rules: ElementRule[];
  // Reclassify an organic hit when its first link points at one of these
  // registrable domains (review platforms, encyclopedias, ...).
  host_kind_overrides?: Record<string, ElementKind>;
}

export interface Extraction {
  pagedoc: PageDocWire;
  // Element id -> live DOM node, for the apply step on the same page.
  nodes: Map<string, Element>;
}

function collapseWhitespace(text: string): string {
  return text.replace(/\s+/g, " ").trim();
}

function hostWithin(host: string, domain: string): boolean {
  return host === domain || host.endsWith("." + domain);
}

function overrideKind(
  kind: ElementKind,
  urls: string[],
  overrides: Record<string, ElementKind> | undefined,
): ElementKind {
  if (kind !== "organic_result" || overrides === undefined || urls.length === 0) {
    return kind;
  }
  let host: string;
  try {
    host = new URL(urls[0]!).hostname;
  } catch {
    return kind;
  }
  for (const [domain, override] of Object.entries(overrides)) {
    if (hostWithin(host, domain)) {
      return override;
    }
  }
  return kind;
}

export function extractPagedoc(doc: Document, rules: AdapterRules): Extraction {
  const union = rules.element_rules.map((r) => r.selector).join(", ");
  const matched = union === "" ? [] : Array.from(doc.querySelectorAll(union));
  const elements: PageElementWire[] = [];
  const nodes = new Map<string, Element>();
  for (const node of matched) {
    const rule = rules.element_rules.find((r) => node.matches(r.selector));
    if (rule === undefined) {
      continue;
    }
    const urls: string[] = [];
    for (const anchor of Array.from(node.querySelectorAll("a[href]"))) {
      const href = (anchor as HTMLAnchorElement).href;
      if (href !== "" && !urls.includes(href)) {
        urls.push(href);
      }
    }
    const rank = elements.length;
    const id = rules.id_prefix + String(rank + 1).padStart(2, "0");
    elements.push({
      id,
      kind: overrideKind(rule.kind, urls, rules.host_kind_overrides),
      text: collapseWhitespace(node.textContent ?? ""),
      urls,
      rank,
    });
    nodes.set(id, node);
  }
  let query: string | null = null;
  if (rules.query_selector !== undefined) {
    const box = doc.querySelector<HTMLInputElement>(rules.query_selector);
    if (box !== null && box.value !== "") {
      query = box.value;
    }
  }
  return {
    pagedoc: {
      surface: rules.surface,
      source_url: doc.location?.href ?? "",
      query,
      elements,
    },
    nodes,
  };
}
