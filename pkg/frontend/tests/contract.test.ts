import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join, resolve } from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, afterEach, beforeAll, describe, expect, it } from "vitest";
import { ApiClient } from "../src/api.js";
import { App } from "../src/main.js";
import { ViewState } from "../src/state.js";
import type { EventsDoc, SummaryDoc } from "../src/types.js";

// End-to-end suite against a real `pedwatch serve` process over a synth
// store: three scripted dwell sessions in hour 10 plus one crossing.

const HERE = dirname(fileURLToPath(import.meta.url));
const REPO = resolve(HERE, "../..");
const PORT = 8761;
const BASE = `http://127.0.0.1:${PORT}`;

let workdir: string;
let server: ChildProcess | undefined;
let serverLog = "";

function scenario(sourceUri: string) {
  return {
    meta: {
      camera_id: "cam42",
      start_ts: "2020-03-10T10:00:00-05:00",
      fps: 10.0,
      frame_count: 1800,
      width: 1920,
      height: 1080,
      source_uri: sourceUri,
    },
    groups: [
      {
        name: "sb_stop",
        kind: "dwell",
        polygons: [[[0, 450], [200, 450], [200, 550], [0, 550]]],
      },
      {
        name: "median",
        kind: "crossing",
        polygons: [[[400, 400], [1600, 400], [1600, 700], [400, 700]]],
      },
    ],
    agents: [
      { behavior: "wait", start_s: 2.0, duration_s: 30.0, roi: "sb_stop" },
      { behavior: "wait", start_s: 60.0, duration_s: 25.0, roi: "sb_stop" },
      { behavior: "wait", start_s: 110.0, duration_s: 20.0, roi: "sb_stop" },
      {
        behavior: "cross",
        start_s: 40.0,
        duration_s: 4.0,
        path: [[500, 380], [500, 720]],
      },
    ],
    seed: 12,
  };
}

function cli(...args: string[]): void {
  const result = spawnSync("python3", ["-m", "pedwatch.cli", ...args], {
    cwd: workdir,
    encoding: "utf-8",
  });
  if (result.status !== 0) {
    throw new Error(
      `pedwatch ${args[0]} failed (${result.status}): ${result.stderr}`,
    );
  }
}

function addUser(users: string, user: string, role: string, pw: string): void {
  const result = spawnSync(
    "python3",
    [
      join(REPO, "scripts", "make_users.py"),
      "--out", users, "--user", user, "--role", role, "--password", pw,
    ],
    { encoding: "utf-8" },
  );
  if (result.status !== 0) {
    throw new Error(`make_users failed: ${result.stderr}`);
  }
}

async function waitForServer(): Promise<void> {
  const deadline = Date.now() + 60_000;
  for (;;) {
    try {
      const r = await fetch(`${BASE}/api/login`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ user: "ana", password: "pw-a" }),
      });
      if (r.status === 200) return;
    } catch {
      // connection refused until uvicorn binds
    }
    if (Date.now() > deadline) {
      throw new Error(`service never came up:\n${serverLog}`);
    }
    await new Promise((r) => setTimeout(r, 250));
  }
}

async function waitFor<T>(
  probe: () => T | null | undefined | false,
  what: string,
): Promise<T> {
  const deadline = Date.now() + 15_000;
  for (;;) {
    const value = probe();
    if (value) return value;
    if (Date.now() > deadline) throw new Error(`timed out waiting for ${what}`);
    await new Promise((r) => setTimeout(r, 50));
  }
}

beforeAll(async () => {
  workdir = mkdtempSync(join(tmpdir(), "pedwatch-ui-"));
  const source = join(workdir, "raw.mp4");
  writeFileSync(source, Buffer.alloc(64));
  const scenarioPath = join(workdir, "scenario.json");
  writeFileSync(scenarioPath, JSON.stringify(scenario(source)));
  const dets = join(workdir, "detections.jsonl");
  cli("synth", "--scenario", scenarioPath, "--out", dets);

  const roi = join(workdir, "roi.json");
  writeFileSync(roi, JSON.stringify({ groups: scenario("x").groups }));
  const boardings = join(workdir, "boardings.csv");
  writeFileSync(
    boardings,
    "stop_id,date,hour,boardings\nsb_stop,2020-03-10,10,4\n",
  );
  const store = join(workdir, "store");
  cli(
    "ingest", "--store", store, "--roi", roi,
    "--detections", dets, "--meta", `${dets}.meta.json`,
    "--boardings", boardings,
  );
  cli("analyze", "--store", store);

  const users = join(workdir, "users.json");
  addUser(users, "ana", "admin", "pw-a");
  addUser(users, "raj", "reviewer", "pw-r");

  server = spawn(
    "python3",
    [
      "-m", "pedwatch.cli", "serve",
      "--store", store, "--users", users, "--addr", `127.0.0.1:${PORT}`,
    ],
    { cwd: workdir },
  );
  server.stdout?.on("data", (chunk) => (serverLog += chunk));
  server.stderr?.on("data", (chunk) => (serverLog += chunk));
  await waitForServer();
});

afterAll(() => {
  server?.kill();
  if (workdir) rmSync(workdir, { recursive: true, force: true });
});

afterEach(() => {
  document.body.textContent = "";
});

async function bootApp(): Promise<{ app: App; root: HTMLElement }> {
  const root = document.createElement("div");
  document.body.appendChild(root);
  const app = new App(new ApiClient(BASE), new ViewState());
  app.mount(root);
  await app.login("ana", "pw-a");
  expect(app.state.loggedIn).toBe(true);
  return { app, root };
}

async function fetchEventsDirect(): Promise<EventsDoc> {
  const api = new ApiClient(BASE);
  await api.login("raj", "pw-r");
  return api.events("2020-03-10", 10, "sb_stop");
}

describe("review portal against a live service", () => {
  it("clicking the hour with three events renders exactly three rows", async () => {
    const { app, root } = await bootApp();
    await app.loadSummary("sb_stop");

    const segment = await waitFor(
      () =>
        root.querySelector(
          'rect.segment[data-date="2020-03-10"][data-hour="10"]',
        ),
      "the 2020-03-10 10:00 segment",
    );
    segment.dispatchEvent(new MouseEvent("click", { bubbles: true }));
    const table = await waitFor(
      () => root.querySelector("table.events"),
      "the drill-down table",
    );

    const reference = await fetchEventsDirect();
    expect(reference.events).toHaveLength(3);
    const rows = Array.from(table.querySelectorAll("tbody tr"));
    expect(rows).toHaveLength(3);
    rows.forEach((tr, i) => {
      const ev = reference.events[i]!;
      expect((tr as HTMLElement).dataset.eventId).toBe(ev.event_id);
      const cells = Array.from(tr.querySelectorAll("td")).map(
        (td) => td.textContent ?? "",
      );
      expect(cells[0]).toContain(ev.t_b.slice(11, 19));
      expect(cells[1]).toBe(ev.kind);
      expect(cells[2]).toBe(`${ev.f_b}-${ev.f_e}`);
      expect(cells[3]).toBe(String(ev.count));
    });
  });

  it("a verdict round-trips and the table re-renders server state", async () => {
    const { app, root } = await bootApp();
    await app.loadSummary("sb_stop");
    await app.drilldown("2020-03-10", 10);
    const firstRow = await waitFor(
      () => root.querySelector<HTMLElement>("table.events tbody tr"),
      "the first event row",
    );
    const eventId = firstRow.dataset.eventId!;

    const select = firstRow.querySelector("select") as HTMLSelectElement;
    const note = firstRow.querySelector('input[type="text"]') as HTMLInputElement;
    select.value = "unsure";
    note.value = "harsh shadow";
    (firstRow.querySelector(".verdict-cell button") as HTMLButtonElement).click();

    const badge = await waitFor(
      () => root.querySelector(`tr[data-event-id="${eventId}"] .badge`),
      "the stored verdict badge",
    );
    // the badge mirrors what the service now stores, not the local click
    const stored = (await fetchEventsDirect()).events.find(
      (ev) => ev.event_id === eventId,
    )!;
    expect(stored.annotations).toHaveLength(1);
    expect(stored.annotations[0]).toMatchObject({
      reviewer: "ana",
      verdict: "unsure",
      note: "harsh shadow",
    });
    expect(badge.textContent).toBe(
      `${stored.annotations[0]!.reviewer}: ${stored.annotations[0]!.verdict}`,
    );

    // a second submission replaces the reviewer's verdict with the latest
    const row2 = root.querySelector<HTMLElement>(
      `tr[data-event-id="${eventId}"]`,
    )!;
    (row2.querySelector("select") as HTMLSelectElement).value = "confirmed";
    (row2.querySelector(".verdict-cell button") as HTMLButtonElement).click();
    await waitFor(
      () =>
        root.querySelector(`tr[data-event-id="${eventId}"] .badge`)
          ?.textContent === "ana: confirmed",
      "the replaced verdict badge",
    );
    const badges = root.querySelectorAll(
      `tr[data-event-id="${eventId}"] .badge`,
    );
    expect(badges).toHaveLength(1);
  });

  it("charts show only numbers taken from the summary response", async () => {
    const { app, root } = await bootApp();
    await app.loadSummary("sb_stop");
    const svg = await waitFor(
      () => root.querySelector("svg.stacked-columns"),
      "the stacked-column chart",
    );

    const api = new ApiClient(BASE);
    await api.login("raj", "pw-r");
    const doc: SummaryDoc = await api.summary("sb_stop");
    expect(doc.total).toBe(3);

    const allowed = new Set<string>();
    for (const [date, total] of Object.entries(doc.daily_totals)) {
      allowed.add(String(total));
      allowed.add(date.slice(5));
    }
    for (const hour of doc.matrix.hours) {
      allowed.add(`${String(hour).padStart(2, "0")}:00`);
      allowed.add(String(hour).padStart(2, "0"));
    }
    for (const text of Array.from(root.querySelectorAll("svg text"))) {
      expect(allowed.has(text.textContent ?? "")).toBe(true);
    }
    for (const item of Array.from(root.querySelectorAll(".hour-legend li"))) {
      expect(allowed.has(item.textContent ?? "")).toBe(true);
    }
    for (const title of Array.from(svg.querySelectorAll("title"))) {
      const match = (title.textContent ?? "").match(
        /(\d{4}-\d{2}-\d{2}) (\d{2}):00 - (\d+)/,
      );
      expect(match).not.toBeNull();
      const [, date, hour, count] = match!;
      const di = doc.matrix.dates.indexOf(date!);
      const hi = doc.matrix.hours.indexOf(Number(hour));
      expect(doc.matrix.counts[di]![hi]).toBe(Number(count));
    }
    const boxTitle = root.querySelector("svg.box-plot title");
    expect(boxTitle?.textContent).toContain(`median ${doc.box["10"]!.median}`);
  });
});
