// End-to-end: a scripted session drives the real UI code with keyboard
// events against a live annotation service (spawned Python process), then
// checks /api/export for exactly the entered scores.

import { spawn, ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { createApp, AnnotationApp } from "../src/app.js";

const HEBREW_TARGETS = [
  "הילד הלך לבית הספר",
  "המורה פתחה את החלון",
  "הספר מונח על השולחן",
  "השמש זורחת מעל ההר",
  "הילדה קראה את המכתב",
  "הגנן השקה את הפרחים",
  "העיר שקטה בלילה",
  "הסוס רץ בשדה הפתוח",
  "האישה שרה שיר ישן",
  "הדייג חזר אל הנמל",
];

function datasetLines(): string {
  const lines: string[] = [];
  for (let i = 0; i < 10; i += 1) {
    const id = `ui${String(i).padStart(3, "0")}`;
    const source = `an english source sentence number ${i}`;
    const target = HEBREW_TARGETS[i]!;
    // id, source, target, score(empty: unscored), origin, parent, engine, agreement, error_count
    lines.push([id, source, target, "", "consensus_filtered", "", "", "", "0"].join("\t"));
  }
  return lines.join("\n") + "\n";
}

let service: ChildProcess;
let baseUrl = "";

beforeAll(async () => {
  const dir = mkdtempSync(join(tmpdir(), "qeforge-ui-"));
  const datasetPath = join(dir, "queue.tsv");
  writeFileSync(datasetPath, datasetLines(), "utf-8");

  service = spawn("python3", [
    "-m", "qeforge.cli", "serve",
    "--dataset", datasetPath,
    "--log", join(dir, "annotations.log"),
    "--port", "0",
  ]);
  baseUrl = await new Promise<string>((resolve, reject) => {
    let buffer = "";
    const onData = (chunk: Buffer) => {
      buffer += chunk.toString();
      const match = buffer.match(/annotation service on (http:\/\/[\d.]+:\d+)\//);
      if (match) resolve(match[1]!);
    };
    service.stdout!.on("data", onData);
    service.stderr!.on("data", (chunk: Buffer) => {
      buffer += chunk.toString();
    });
    service.on("exit", () => reject(new Error(`service exited early:\n${buffer}`)));
    setTimeout(() => reject(new Error(`service did not start:\n${buffer}`)), 20_000);
  });
});

afterAll(() => {
  service?.kill("SIGINT");
});

function pressKey(key: string): void {
  document.dispatchEvent(new KeyboardEvent("keydown", { key, bubbles: true }));
}

async function fetchExportLines(): Promise<string[][]> {
  const response = await fetch(`${baseUrl}/api/export`);
  const text = await response.text();
  if (!text.trim()) return [];
  return text
    .trim()
    .split("\n")
    .map((line) => line.split("\t"));
}

describe("annotation UI end to end", () => {
  let app: AnnotationApp;

  it("annotates a 10-segment queue via keyboard shortcuts", async () => {
    const root = document.createElement("div");
    document.body.appendChild(root);
    app = createApp(root, { annotator: "e2e", baseUrl, retryMs: 100 });
    await app.start();
    await app.whenIdle();

    const entered: Record<string, number> = {};
    const scoreCycle = [5, 3, 1, 4, 2, 5, 4, 3, 2, 1];

    for (let i = 0; i < 10; i += 1) {
      const state = app.state;
      expect(state.done).toBe(false);
      expect(state.current).not.toBeNull();
      const segment = state.current!;

      // the Hebrew target renders right-to-left beside the LTR source
      const targetNode = root.querySelector<HTMLElement>(".target-text")!;
      expect(targetNode.dir).toBe("rtl");
      expect(targetNode.textContent).toBe(segment.target);
      const sourceNode = root.querySelector<HTMLElement>(".source-text")!;
      expect(sourceNode.dir).toBe("ltr");

      const score = scoreCycle[i]!;
      pressKey(String(score));
      expect(app.state.selectedScore).toBe(score);
      entered[segment.segment_id] = score;

      if (i === 4) {
        // double-press guard: the second Enter lands while in flight
        pressKey("Enter");
        pressKey("Enter");
      } else {
        pressKey("Enter");
      }
      await app.whenIdle();
    }

    expect(app.state.done).toBe(true);
    expect(app.state.annotatedCount).toBe(10);
    expect(root.querySelector<HTMLElement>(".done-screen")!.hidden).toBe(false);
    expect(root.querySelector(".done-summary")!.textContent).toContain("10");

    const rows = await fetchExportLines();
    expect(rows).toHaveLength(10);
    for (const row of rows) {
      const [id, , , score, origin] = row;
      expect(origin).toBe("human_ranked");
      expect(Number(score)).toBe(entered[id!]);
    }
    const ids = rows.map((row) => row[0]);
    expect(new Set(ids).size).toBe(10);
  });

  it("blocks submission without a score selected", async () => {
    const root = document.createElement("div");
    document.body.appendChild(root);
    const blocked = createApp(root, { annotator: "second", baseUrl, retryMs: 100 });
    await blocked.start();
    await blocked.whenIdle();
    expect(blocked.state.current).not.toBeNull();

    const before = (await fetchExportLines()).length;
    const submitted = await blocked.submitCurrent();
    expect(submitted).toBe(false);
    expect(root.querySelector<HTMLElement>(".field-error")!.hidden).toBe(false);
    expect((await fetchExportLines()).length).toBe(before);
    blocked.dispose();
  });

  it("shows score tooltips from the ranking scale", async () => {
    const root = document.createElement("div");
    document.body.appendChild(root);
    const viewer = createApp(root, { annotator: "third", baseUrl, retryMs: 100 });
    await viewer.start();
    await viewer.whenIdle();
    const five = root.querySelector<HTMLButtonElement>('.score[data-score="5"]')!;
    expect(five.title).toBe("excellent translation; no corrections needed");
    const rubricLink = root.querySelector<HTMLAnchorElement>('a[href="/rubric"]');
    expect(rubricLink).not.toBeNull();
    viewer.dispose();
  });

  it("queues submissions through an outage and flushes in order", async () => {
    const root = document.createElement("div");
    document.body.appendChild(root);
    const offline = createApp(root, { annotator: "offline", baseUrl, retryMs: 50 });
    await offline.start();
    await offline.whenIdle();
    const segment = offline.state.current!;

    // break the transport, submit, then restore it
    const realFetch = globalThis.fetch;
    globalThis.fetch = (() => Promise.reject(new TypeError("network down"))) as typeof fetch;
    offline.selectScore(4);
    const submitted = await offline.submitCurrent();
    expect(submitted).toBe(false);
    expect(offline.state.queuedSubmissions).toBe(1);
    expect(root.querySelector<HTMLElement>(".banner")!.hidden).toBe(false);

    globalThis.fetch = realFetch;
    await offline.flushQueue();
    expect(offline.state.queuedSubmissions).toBe(0);

    const rows = await fetchExportLines();
    const mine = rows.find((row) => row[0] === segment.segment_id);
    expect(mine).toBeDefined();
    offline.dispose();
  });
});
