// Browser entry point: ask for the annotator's name once, then run the app.

import { createApp } from "./app.js";

const STORAGE_KEY = "qeforge.annotator";

function resolveAnnotator(): string {
  const stored = window.localStorage.getItem(STORAGE_KEY);
  if (stored) return stored;
  const name = (window.prompt("Annotator name:") ?? "").trim() || "anonymous";
  window.localStorage.setItem(STORAGE_KEY, name);
  return name;
}

const root = document.getElementById("app");
if (root === null) throw new Error("missing #app container");
const app = createApp(root, { annotator: resolveAnnotator() });
void app.start();
