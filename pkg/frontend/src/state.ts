// Per-install user state: enrollments, whitelist, priority order. The JSON
// document round-trips byte for byte with the engine's serializer (sorted
// keys, compact separators) so either side can own the stored copy.

import type { StrengthLevel } from "./wire";

export const STATE_SCHEMA_VERSION = 1;

export interface Enrollment {
  enabled: boolean;
  level: StrengthLevel;
}

export interface UserStateDoc {
  schema_version: number;
  install_id: string;
  enrollments: Record<string, Enrollment>;
  whitelist: string[];
  // Enabled campaign ids, highest priority first; always a permutation of
  // the enabled enrollment keys.
  priorities: string[];
}

export class UserStateError extends Error {}

const LEVELS: ReadonlySet<string> = new Set(["High", "Medium", "Low"]);

function randomInstallId(): string {
  const bytes = new Uint8Array(16);
  crypto.getRandomValues(bytes);
  return Array.from(bytes, (b) => b.toString(16).padStart(2, "0")).join("");
}

export function newInstall(installId?: string): UserStateDoc {
  return {
    schema_version: STATE_SCHEMA_VERSION,
    install_id: installId ?? randomInstallId(),
    enrollments: {},
    whitelist: [],
    priorities: [],
  };
}

function enabledIds(doc: UserStateDoc): Set<string> {
  const ids = new Set<string>();
  for (const [cid, e] of Object.entries(doc.enrollments)) {
    if (e.enabled) {
      ids.add(cid);
    }
  }
  return ids;
}

export function parseUserState(raw: string): UserStateDoc {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch (err) {
    throw new UserStateError(`not valid JSON: ${String(err)}`);
  }
  if (typeof data !== "object" || data === null || Array.isArray(data)) {
    throw new UserStateError("state document must be a JSON object");
  }
  const doc = data as Record<string, unknown>;
  if (doc["schema_version"] !== STATE_SCHEMA_VERSION) {
    throw new UserStateError(`unsupported schema_version: ${String(doc["schema_version"])}`);
  }
  if (typeof doc["install_id"] !== "string" || doc["install_id"] === "") {
    throw new UserStateError("install_id must be a non-empty string");
  }
  const enrollmentsRaw = doc["enrollments"];
  if (typeof enrollmentsRaw !== "object" || enrollmentsRaw === null || Array.isArray(enrollmentsRaw)) {
    throw new UserStateError("enrollments must be an object");
  }
  const enrollments: Record<string, Enrollment> = {};
  for (const [cid, value] of Object.entries(enrollmentsRaw as Record<string, unknown>)) {
    if (typeof value !== "object" || value === null || Array.isArray(value)) {
      throw new UserStateError(`enrollment ${cid} must be an object`);
    }
    const entry = value as Record<string, unknown>;
    if (typeof entry["enabled"] !== "boolean") {
      throw new UserStateError(`enrollment ${cid}: enabled must be a boolean`);
    }
    if (typeof entry["level"] !== "string" || !LEVELS.has(entry["level"])) {
      throw new UserStateError(`enrollment ${cid}: bad level ${String(entry["level"])}`);
    }
    enrollments[cid] = { enabled: entry["enabled"], level: entry["level"] as StrengthLevel };
  }
  const whitelistRaw = doc["whitelist"];
  if (!Array.isArray(whitelistRaw) || whitelistRaw.some((w) => typeof w !== "string")) {
    throw new UserStateError("whitelist must be an array of strings");
  }
  const prioritiesRaw = doc["priorities"];
  if (!Array.isArray(prioritiesRaw) || prioritiesRaw.some((p) => typeof p !== "string")) {
    throw new UserStateError("priorities must be an array of strings");
  }
  const result: UserStateDoc = {
    schema_version: STATE_SCHEMA_VERSION,
    install_id: doc["install_id"],
    enrollments,
    whitelist: Array.from(new Set(whitelistRaw as string[])),
    priorities: prioritiesRaw as string[],
  };
  const enabled = enabledIds(result);
  const seen = new Set(result.priorities);
  if (seen.size !== result.priorities.length || seen.size !== enabled.size
      || result.priorities.some((cid) => !enabled.has(cid))) {
    throw new UserStateError("priorities must be a permutation of enabled campaign ids");
  }
  return result;
}

function sortedStringify(value: unknown): string {
  if (Array.isArray(value)) {
    return "[" + value.map(sortedStringify).join(",") + "]";
  }
  if (typeof value === "object" && value !== null) {
    const record = value as Record<string, unknown>;
    const parts = Object.keys(record)
      .sort()
      .map((k) => JSON.stringify(k) + ":" + sortedStringify(record[k]));
    return "{" + parts.join(",") + "}";
  }
  return JSON.stringify(value);
}

export function serializeUserState(doc: UserStateDoc): string {
  return sortedStringify({
    schema_version: doc.schema_version,
    install_id: doc.install_id,
    enrollments: doc.enrollments,
    whitelist: [...doc.whitelist].sort(),
    priorities: doc.priorities,
  });
}

function requireEnrolled(doc: UserStateDoc, campaignId: string): Enrollment {
  const entry = doc.enrollments[campaignId];
  if (entry === undefined) {
    throw new UserStateError(`not enrolled: ${campaignId}`);
  }
  return entry;
}

export function enrollCampaign(
  doc: UserStateDoc,
  campaignId: string,
  level: StrengthLevel,
): UserStateDoc {
  const enrollments = { ...doc.enrollments, [campaignId]: { enabled: true, level } };
  const priorities = doc.priorities.includes(campaignId)
    ? doc.priorities
    : [...doc.priorities, campaignId];
  return { ...doc, enrollments, priorities };
}

export function setLevel(doc: UserStateDoc, campaignId: string, level: StrengthLevel): UserStateDoc {
  const entry = requireEnrolled(doc, campaignId);
  return { ...doc, enrollments: { ...doc.enrollments, [campaignId]: { ...entry, level } } };
}

export function toggleCampaign(doc: UserStateDoc, campaignId: string, enabled: boolean): UserStateDoc {
  const entry = requireEnrolled(doc, campaignId);
  const enrollments = { ...doc.enrollments, [campaignId]: { ...entry, enabled } };
  let priorities: string[];
  if (enabled) {
    priorities = doc.priorities.includes(campaignId)
      ? doc.priorities
      : [...doc.priorities, campaignId];
  } else {
    priorities = doc.priorities.filter((cid) => cid !== campaignId);
  }
  return { ...doc, enrollments, priorities };
}

export function setPriorities(doc: UserStateDoc, orderedIds: string[]): UserStateDoc {
  const enabled = enabledIds(doc);
  const seen = new Set(orderedIds);
  if (seen.size !== orderedIds.length || seen.size !== enabled.size
      || orderedIds.some((cid) => !enabled.has(cid))) {
    throw new UserStateError("priorities must be a permutation of enabled campaign ids");
  }
  return { ...doc, priorities: [...orderedIds] };
}

export function addWhitelist(doc: UserStateDoc, target: string): UserStateDoc {
  if (doc.whitelist.includes(target)) {
    return doc;
  }
  return { ...doc, whitelist: [...doc.whitelist, target] };
}

export function removeWhitelist(doc: UserStateDoc, target: string): UserStateDoc {
  return { ...doc, whitelist: doc.whitelist.filter((t) => t !== target) };
}
