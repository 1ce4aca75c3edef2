import { describe, expect, it, vi } from "vitest";
import { ViewState } from "../src/state.js";
import { eventRowsFixture, summaryFixture } from "./fixtures.js";

describe("ViewState", () => {
  it("notifies subscribers on every transition", () => {
    const state = new ViewState(() => {});
    const seen = vi.fn();
    state.subscribe(seen);
    state.login("ana");
    state.setSummary("sb_stop", summaryFixture());
    state.setCell("2020-03-10", 10, eventRowsFixture());
    expect(seen).toHaveBeenCalledTimes(3);
  });

  it("stores the drilldown cell alongside its rows", () => {
    const state = new ViewState(() => {});
    state.login("ana");
    state.setCell("2020-03-10", 10, eventRowsFixture());
    expect(state.selection.date).toBe("2020-03-10");
    expect(state.selection.hour).toBe(10);
    expect(state.events).toHaveLength(3);
  });

  it("logout purges credentials and cached clips but keeps the selection", () => {
    const revoke = vi.fn();
    const state = new ViewState(revoke);
    state.login("ana");
    state.setSummary("median", summaryFixture());
    state.setCell("2020-03-11", 14, eventRowsFixture());
    state.cacheClip("ev-1", "blob:a");
    state.cacheClip("ev-2", "blob:b");
    state.playClip("ev-1");

    state.logout();

    expect(state.loggedIn).toBe(false);
    expect(state.reviewer).toBeNull();
    expect(state.summary).toBeNull();
    expect(state.events).toEqual([]);
    expect(state.activeClipEvent).toBeNull();
    expect(state.clipUrl("ev-1")).toBeUndefined();
    expect(revoke).toHaveBeenCalledWith("blob:a");
    expect(revoke).toHaveBeenCalledWith("blob:b");
    // the selection survives so a re-login lands back on the same cell
    expect(state.selection).toEqual({
      group: "median",
      date: "2020-03-11",
      hour: 14,
    });
  });

  it("replacing a cached clip revokes the stale object URL", () => {
    const revoke = vi.fn();
    const state = new ViewState(revoke);
    state.cacheClip("ev-1", "blob:old");
    state.cacheClip("ev-1", "blob:new");
    expect(revoke).toHaveBeenCalledWith("blob:old");
    expect(state.clipUrl("ev-1")).toBe("blob:new");
  });

  it("serializes verdict submissions per event", () => {
    const state = new ViewState(() => {});
    expect(state.beginVerdict("ev-1")).toBe(true);
    expect(state.beginVerdict("ev-1")).toBe(false);
    expect(state.beginVerdict("ev-2")).toBe(true);
    expect(state.verdictPending("ev-1")).toBe(true);
    state.endVerdict("ev-1");
    expect(state.verdictPending("ev-1")).toBe(false);
    expect(state.beginVerdict("ev-1")).toBe(true);
  });

  it("switching groups clears stale drilldown rows", () => {
    const state = new ViewState(() => {});
    state.setCell("2020-03-10", 10, eventRowsFixture());
    state.setSummary("median", summaryFixture());
    expect(state.selection.group).toBe("median");
    expect(state.selection.date).toBeNull();
    expect(state.events).toEqual([]);
  });
});
