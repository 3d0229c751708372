import { describe, expect, it } from "vitest";
import { JSDOM } from "jsdom";

import { applyOutcome } from "../src/apply";
import { extractPagedoc } from "../src/extract";
import type { OutcomeWire } from "../src/wire";
import {
  AMAZON_SEARCH,
  GOOGLE_SERP,
  loadCanonicalPagedoc,
  loadFixtureDom,
  loadOutcomeGolden,
} from "./helpers";

function hiddenIds(nodes: Map<string, Element>): string[] {
  return [...nodes.entries()]
    .filter(([, node]) => node.hasAttribute("data-oos-hidden"))
    .map(([id]) => id);
}

describe("applyOutcome renders the filtering outcome", () => {
  const canonical = loadCanonicalPagedoc("serp_hobby_lobby.json");
  const outcome = loadOutcomeGolden("serp_hobby_lobby.gyw-high.json");

  function renderedPage() {
    const dom = loadFixtureDom("serp_hobby_lobby.html", canonical.source_url);
    const { nodes } = extractPagedoc(dom.window.document, GOOGLE_SERP);
    const summary = applyOutcome(dom.window.document, outcome, nodes);
    return { dom, nodes, summary };
  }

  it("hides every removed element and nothing else", () => {
    const { nodes, summary } = renderedPage();
    expect(summary.hidden).toBe(outcome.hidden_count);
    expect(hiddenIds(nodes)).toEqual(["e01", "e02", "e03", "e04", "e05", "e06", "e07", "e08"]);
    for (const id of ["e09", "e10"]) {
      const node = nodes.get(id)! as HTMLElement;
      expect(node.hasAttribute("data-oos-hidden")).toBe(false);
      expect(node.style.display).toBe("");
    }
  });

  it("removed elements are display none", () => {
    const { nodes } = renderedPage();
    expect((nodes.get("e01")! as HTMLElement).style.display).toBe("none");
  });

  it("prepends the banner and whitelist prompt in cue order", () => {
    const { dom } = renderedPage();
    const body = dom.window.document.body;
    const cues = body.firstElementChild!;
    expect(cues.className).toBe("oos-cues");
    const rows = [...cues.children];
    expect(rows.map((r) => r.className)).toEqual(["oos-banner", "oos-whitelist-prompt"]);
    expect(rows[0]!.textContent).toBe(
      "Out of Site has hidden some results because of the GrabYourWallet campaign",
    );
    expect(rows[1]!.textContent).toBe("Whitelist hobbylobby.com | Whitelist Hobby Lobby");
  });

  it("reports the badge text instead of injecting it", () => {
    const { dom, summary } = renderedPage();
    expect(summary.badgeText).toBe("8");
    expect(dom.window.document.querySelectorAll(".oos-badge")).toHaveLength(0);
  });

  it("is idempotent when applied twice", () => {
    const dom = loadFixtureDom("serp_hobby_lobby.html", canonical.source_url);
    const { nodes } = extractPagedoc(dom.window.document, GOOGLE_SERP);
    applyOutcome(dom.window.document, outcome, nodes);
    const once = dom.window.document.documentElement.outerHTML;
    applyOutcome(dom.window.document, outcome, nodes);
    expect(dom.window.document.documentElement.outerHTML).toBe(once);
    expect(hiddenIds(nodes)).toHaveLength(8);
    expect(dom.window.document.querySelectorAll(".oos-banner")).toHaveLength(1);
  });
});

describe("applyOutcome renders the overlay outcome", () => {
  const canonical = loadCanonicalPagedoc("amazon_skinfood_lip.json");
  const outcome = loadOutcomeGolden("amazon_skinfood.sat-low.json");

  it("overlays exactly the targeted cards with the exact message", () => {
    const dom = loadFixtureDom("amazon_search_skinfood.html", canonical.source_url);
    const { nodes } = extractPagedoc(dom.window.document, AMAZON_SEARCH);
    const summary = applyOutcome(dom.window.document, outcome, nodes);
    expect(summary.hidden).toBe(0);
    const overlaid = [...nodes.entries()].filter(([, n]) => n.querySelector(".oos-overlay") !== null);
    expect(overlaid.map(([id]) => id)).toEqual(["a01", "a03", "a06"]);
    expect(nodes.get("a01")!.querySelector(".oos-overlay")!.textContent).toBe(
      "ChapStick is targeted by the campaign Stop Animal Testing",
    );
    expect(nodes.get("a03")!.querySelector(".oos-overlay")!.textContent).toBe(
      "Maybelline is targeted by the campaign Stop Animal Testing",
    );
  });

  it("applies one overlay even when rendered twice", () => {
    const dom = loadFixtureDom("amazon_search_skinfood.html", canonical.source_url);
    const { nodes } = extractPagedoc(dom.window.document, AMAZON_SEARCH);
    applyOutcome(dom.window.document, outcome, nodes);
    applyOutcome(dom.window.document, outcome, nodes);
    expect(nodes.get("a01")!.querySelectorAll(".oos-overlay")).toHaveLength(1);
  });
});

describe("applyOutcome renders the reorder outcome", () => {
  const canonical = loadCanonicalPagedoc("amazon_skinfood_lip.json");
  const outcome = loadOutcomeGolden("amazon_skinfood.sat-medium.json");

  it("moves targeted cards to the bottom in rank order", () => {
    const dom = loadFixtureDom("amazon_search_skinfood.html", canonical.source_url);
    const doc = dom.window.document;
    const { nodes } = extractPagedoc(doc, AMAZON_SEARCH);
    const summary = applyOutcome(doc, outcome, nodes);
    expect(summary.hidden).toBe(0);
    const container = doc.querySelector(".s-main-slot")!;
    const order = [...container.children].map((child) => {
      for (const [id, node] of nodes) {
        if (node === child) {
          return id;
        }
      }
      return "?";
    });
    expect(order).toEqual(["a02", "a04", "a05", "a01", "a03", "a06"]);
  });
});

describe("applyOutcome edge handling", () => {
  it("leaves the document untouched for an all-keep outcome", () => {
    const canonical = loadCanonicalPagedoc("amazon_skinfood_lip.json");
    const dom = loadFixtureDom("amazon_search_skinfood.html", canonical.source_url);
    const doc = dom.window.document;
    const { nodes } = extractPagedoc(doc, AMAZON_SEARCH);
    const before = doc.documentElement.outerHTML;
    const outcome: OutcomeWire = {
      surface: "amazon_search",
      page_actions: canonical.elements.map((e) => ({ element_id: e.id, kind: "keep" })),
      injected_cues: [],
      events: [],
      hidden_count: 0,
    };
    const summary = applyOutcome(doc, outcome, nodes);
    expect(doc.documentElement.outerHTML).toBe(before);
    expect(summary).toEqual({ hidden: 0, badgeText: null, staleIds: [] });
  });

  it("skips actions whose elements are gone and reports them", () => {
    const dom = new JSDOM("<div id='search'><div class='g'><a href='https://x.example/'>X</a></div></div>", {
      url: "https://www.google.com/search?q=x",
    });
    const doc = dom.window.document;
    const { nodes } = extractPagedoc(doc, GOOGLE_SERP);
    nodes.get("e01")!.remove();
    const outcome: OutcomeWire = {
      surface: "google_serp",
      page_actions: [
        { element_id: "e01", kind: "remove", campaign_id: "c", target_label: "x" },
        { element_id: "zz99", kind: "overlay", campaign_id: "c", target_label: "x" },
      ],
      injected_cues: [],
      events: [],
      hidden_count: 1,
    };
    const summary = applyOutcome(doc, outcome, nodes);
    expect(summary.staleIds).toEqual(["e01", "zz99"]);
    expect(summary.hidden).toBe(0);
  });

  it("renders a call to action with prompt and mail link", () => {
    const dom = new JSDOM("<div id='search'><div class='g'><a href='https://x.example/'>X</a></div></div>", {
      url: "https://www.google.com/search?q=x",
    });
    const doc = dom.window.document;
    const { nodes } = extractPagedoc(doc, GOOGLE_SERP);
    const outcome: OutcomeWire = {
      surface: "google_serp",
      page_actions: [
        {
          element_id: "e01",
          kind: "annotate_cta",
          campaign_id: "c",
          target_label: "x",
          prompt_text: "Consider telling X why you are taking your business elsewhere.",
          mailto_link: "mailto:feedback@example.org?subject=Why%20I%20am%20boycotting%20X",
        },
      ],
      injected_cues: [],
      events: [],
      hidden_count: 0,
    };
    applyOutcome(doc, outcome, nodes);
    const note = nodes.get("e01")!.querySelector(".oos-cta")!;
    expect(note.querySelector("p")!.textContent).toBe(
      "Consider telling X why you are taking your business elsewhere.",
    );
    expect(note.querySelector("a")!.getAttribute("href")).toBe(
      "mailto:feedback@example.org?subject=Why%20I%20am%20boycotting%20X",
    );
  });
});
