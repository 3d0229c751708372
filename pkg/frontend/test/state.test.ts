import { describe, expect, it } from "vitest";

import {
  UserStateError,
  addWhitelist,
  enrollCampaign,
  newInstall,
  parseUserState,
  removeWhitelist,
  serializeUserState,
  setLevel,
  setPriorities,
  toggleCampaign,
} from "../src/state";

// Byte-for-byte output of the engine's serializer for the same document,
// built by the same sequence of transitions. Keep frozen.
const ENGINE_SERIALIZED =
  '{"enrollments":{"grabyourwallet":{"enabled":true,"level":"High"},'
  + '"stop-animal-testing":{"enabled":true,"level":"Low"}},'
  + '"install_id":"aaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaa",'
  + '"priorities":["grabyourwallet","stop-animal-testing"],'
  + '"schema_version":1,'
  + '"whitelist":["ChapStick","hobbylobby.com"]}';

function sampleDoc() {
  let doc = newInstall("a".repeat(32));
  doc = enrollCampaign(doc, "grabyourwallet", "High");
  doc = enrollCampaign(doc, "stop-animal-testing", "Low");
  doc = addWhitelist(doc, "hobbylobby.com");
  doc = addWhitelist(doc, "ChapStick");
  return doc;
}

describe("serialization", () => {
  it("matches the engine serializer byte for byte", () => {
    expect(serializeUserState(sampleDoc())).toBe(ENGINE_SERIALIZED);
  });

  it("round trips through parse", () => {
    const doc = sampleDoc();
    const back = parseUserState(serializeUserState(doc));
    expect(back.install_id).toBe(doc.install_id);
    expect(back.enrollments).toEqual(doc.enrollments);
    expect(back.priorities).toEqual(doc.priorities);
    expect([...back.whitelist].sort()).toEqual([...doc.whitelist].sort());
    expect(serializeUserState(back)).toBe(ENGINE_SERIALIZED);
  });

  it("sorts the whitelist on output regardless of insertion order", () => {
    let doc = newInstall("b".repeat(32));
    doc = addWhitelist(doc, "zebra.example");
    doc = addWhitelist(doc, "Alpha");
    expect(serializeUserState(doc)).toContain('"whitelist":["Alpha","zebra.example"]');
  });
});

describe("parse validation", () => {
  it.each([
    ["not json", "{nope"],
    ["wrong schema version", '{"schema_version":2,"install_id":"x","enrollments":{},"whitelist":[],"priorities":[]}'],
    ["empty install id", '{"schema_version":1,"install_id":"","enrollments":{},"whitelist":[],"priorities":[]}'],
    ["array state", "[1,2]"],
    ["bad level", '{"schema_version":1,"install_id":"x","enrollments":{"c":{"enabled":true,"level":"EXTREME"}},"whitelist":[],"priorities":["c"]}'],
    ["non boolean enabled", '{"schema_version":1,"install_id":"x","enrollments":{"c":{"enabled":1,"level":"High"}},"whitelist":[],"priorities":["c"]}'],
    ["priority for disabled campaign", '{"schema_version":1,"install_id":"x","enrollments":{"c":{"enabled":false,"level":"High"}},"whitelist":[],"priorities":["c"]}'],
    ["missing priority entry", '{"schema_version":1,"install_id":"x","enrollments":{"c":{"enabled":true,"level":"High"}},"whitelist":[],"priorities":[]}'],
    ["duplicate priorities", '{"schema_version":1,"install_id":"x","enrollments":{"c":{"enabled":true,"level":"High"}},"whitelist":[],"priorities":["c","c"]}'],
    ["numeric whitelist entry", '{"schema_version":1,"install_id":"x","enrollments":{},"whitelist":[3],"priorities":[]}'],
  ])("rejects %s", (_label, raw) => {
    expect(() => parseUserState(raw)).toThrow(UserStateError);
  });
});

describe("transitions", () => {
  it("creates random 32 hex install ids", () => {
    const a = newInstall();
    const b = newInstall();
    expect(a.install_id).toMatch(/^[0-9a-f]{32}$/);
    expect(a.install_id).not.toBe(b.install_id);
  });

  it("appends new enrollments at lowest priority", () => {
    const doc = sampleDoc();
    expect(doc.priorities).toEqual(["grabyourwallet", "stop-animal-testing"]);
  });

  it("re-enrolling keeps the existing priority slot", () => {
    let doc = sampleDoc();
    doc = enrollCampaign(doc, "grabyourwallet", "Medium");
    expect(doc.priorities).toEqual(["grabyourwallet", "stop-animal-testing"]);
    expect(doc.enrollments["grabyourwallet"]!.level).toBe("Medium");
  });

  it("setLevel changes only the level", () => {
    const doc = setLevel(sampleDoc(), "stop-animal-testing", "High");
    expect(doc.enrollments["stop-animal-testing"]).toEqual({ enabled: true, level: "High" });
    expect(() => setLevel(doc, "ghost", "Low")).toThrow(UserStateError);
  });

  it("toggling off drops the priority entry; re-enabling appends at the end", () => {
    let doc = sampleDoc();
    doc = toggleCampaign(doc, "grabyourwallet", false);
    expect(doc.priorities).toEqual(["stop-animal-testing"]);
    expect(doc.enrollments["grabyourwallet"]!.enabled).toBe(false);
    doc = toggleCampaign(doc, "grabyourwallet", true);
    expect(doc.priorities).toEqual(["stop-animal-testing", "grabyourwallet"]);
  });

  it("setPriorities accepts exactly a permutation of enabled ids", () => {
    let doc = sampleDoc();
    doc = setPriorities(doc, ["stop-animal-testing", "grabyourwallet"]);
    expect(doc.priorities).toEqual(["stop-animal-testing", "grabyourwallet"]);
    expect(() => setPriorities(doc, ["grabyourwallet"])).toThrow(UserStateError);
    expect(() => setPriorities(doc, ["grabyourwallet", "grabyourwallet"])).toThrow(UserStateError);
    expect(() => setPriorities(doc, ["grabyourwallet", "ghost"])).toThrow(UserStateError);
  });

  it("whitelist add is idempotent and remove is exact", () => {
    let doc = newInstall("c".repeat(32));
    doc = addWhitelist(doc, "brand.example");
    const same = addWhitelist(doc, "brand.example");
    expect(same.whitelist).toEqual(["brand.example"]);
    expect(removeWhitelist(same, "brand.example").whitelist).toEqual([]);
    expect(removeWhitelist(same, "other.example").whitelist).toEqual(["brand.example"]);
  });

  it("transitions never mutate their input", () => {
    const doc = sampleDoc();
    const serialized = serializeUserState(doc);
    toggleCampaign(doc, "grabyourwallet", false);
    setLevel(doc, "grabyourwallet", "Low");
    addWhitelist(doc, "new.example");
    removeWhitelist(doc, "hobbylobby.com");
    setPriorities(doc, ["stop-animal-testing", "grabyourwallet"]);
    expect(serializeUserState(doc)).toBe(serialized);
  });
});
