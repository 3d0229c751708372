// Seam for the decision engine. The background worker never computes
// matching or intervention decisions itself; it hands every page document
// to whatever implements this port and renders the outcome verbatim. The
// production build plugs in the compiled engine module here. Until a port
// is registered the extension is inert: pages pass through unmodified.

import type { CampaignWire, OutcomeWire, PageDocWire } from "./wire";

export interface EnginePort {
  applyToPage(
    pagedoc: PageDocWire,
    userStateJson: string,
    campaigns: CampaignWire[],
    nowIso: string,
  ): OutcomeWire;
}

let activePort: EnginePort | null = null;

export function setEnginePort(port: EnginePort | null): void {
  activePort = port;
}

export function enginePort(): EnginePort | null {
  return activePort;
}
