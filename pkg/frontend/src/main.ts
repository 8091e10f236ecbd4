/**
 * App bootstrap: one session, one command box, one viewport.
 *
 * UI state is a pure function of the last server response plus the local
 * orbit offset; every command round-trips through the service and the
 * scene is rebuilt from the returned payload.
 */

import { ApiError, Client } from "./api";
import { buildSceneView } from "./view";
import { Viewer } from "./viewer";
import type { StateWire } from "./wire";

const params = new URLSearchParams(location.search);
const serverUrl = params.get("server") ?? "http://127.0.0.1:8000";
const client = new Client(serverUrl);

const viewport = document.getElementById("viewport")!;
const form = document.getElementById("command-form") as HTMLFormElement;
const input = document.getElementById("command") as HTMLInputElement;
const status = document.getElementById("status")!;
const viewer = new Viewer(viewport);

let sessionId = "";
let lastCameraJson = "";

function note(text: string, isError = false): void {
  status.textContent = text;
  status.classList.toggle("error", isError);
}

async function render(state: StateWire): Promise<void> {
  const models = await client.modelsFor(state.scene);
  const view = buildSceneView(state.scene, models, state.selection);
  // The server camera is authoritative only when it moved (LookAt);
  // otherwise the user's local orbit survives the update.
  const cameraJson = JSON.stringify(state.camera);
  const cameraMoved = cameraJson !== lastCameraJson;
  lastCameraJson = cameraJson;
  viewer.setView(view, cameraMoved ? state.camera : null);
}

async function send(text: string): Promise<void> {
  input.disabled = true;
  try {
    const reply = await client.sendText(sessionId, text);
    await render(reply.state);
    const notes: string[] = [];
    if (reply.degradedFlag) notes.push("layout degraded; consider moving things");
    notes.push(...reply.warnings);
    note(notes.length ? notes.join(" | ") : "ok");
  } catch (err) {
    if (err instanceof ApiError) {
      const marker = err.span ? ` (at ${err.span[0]}..${err.span[1]})` : "";
      note(`${err.code}: ${err.message}${marker}`, true);
    } else {
      note(String(err), true);
    }
  } finally {
    input.disabled = false;
    input.focus();
  }
}

form.addEventListener("submit", (ev) => {
  ev.preventDefault();
  const text = input.value.trim();
  if (!text || input.disabled) return;
  input.value = "";
  void send(text);
});

viewer.onPick = (_id, category) => {
  if (!input.disabled) void send(`select the ${category}`);
};

async function boot(): Promise<void> {
  note(`connecting to ${serverUrl} ...`);
  if (!(await client.healthz())) {
    note(`no service at ${serverUrl}; start one with: sceneforge serve`, true);
    return;
  }
  const session = await client.createSession();
  sessionId = session.id;
  lastCameraJson = JSON.stringify(session.state.camera);
  await render(session.state);
  note(`session ${session.id} (seed ${session.seed}); describe a scene to begin`);
}

void boot();
