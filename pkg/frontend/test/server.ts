/**
 * Boots the real scene service for the round-trip suite. The frontend
 * itself never touches Python; this helper is test plumbing only.
 */

import { spawn, spawnSync } from "node:child_process";
import type { ChildProcess } from "node:child_process";
import { fileURLToPath } from "node:url";
import { join } from "node:path";

export interface LiveServer {
  baseUrl: string;
  stop(): Promise<void>;
}

const FIXTURES = fileURLToPath(new URL("./fixtures", import.meta.url));

function packagedCatalogPath(): string {
  const probe = spawnSync(
    "python3",
    [
      "-c",
      "from importlib import resources; print(resources.files('sceneforge').joinpath('data/catalog.json'))",
    ],
    { encoding: "utf-8" }
  );
  if (probe.status !== 0) {
    throw new Error(`cannot locate the packaged catalog: ${probe.stderr}`);
  }
  return probe.stdout.trim();
}

async function waitHealthy(baseUrl: string, proc: ChildProcess): Promise<void> {
  const deadline = Date.now() + 60_000;
  let exited = "";
  proc.on("exit", (code) => {
    exited = `server exited early with code ${code}`;
  });
  while (Date.now() < deadline) {
    if (exited) throw new Error(exited);
    try {
      const res = await fetch(baseUrl + "/healthz");
      if (res.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 200));
  }
  throw new Error(`service at ${baseUrl} never became healthy`);
}

export async function startServer(): Promise<LiveServer> {
  const port = 21000 + Math.floor(Math.random() * 20000);
  const baseUrl = `http://127.0.0.1:${port}`;
  const proc = spawn(
    "python3",
    [
      "-c",
      "from sceneforge.cli import main; main()",
      "serve",
      "--kb",
      join(FIXTURES, "kb.json"),
      "--catalog",
      packagedCatalogPath(),
      "--port",
      String(port),
    ],
    { stdio: ["ignore", "pipe", "pipe"] }
  );
  let stderr = "";
  proc.stderr?.on("data", (chunk) => {
    stderr += String(chunk);
  });
  try {
    await waitHealthy(baseUrl, proc);
  } catch (err) {
    proc.kill("SIGKILL");
    throw new Error(`${String(err)}\n${stderr}`);
  }
  return {
    baseUrl,
    stop: () =>
      new Promise<void>((resolve) => {
        proc.once("exit", () => resolve());
        proc.kill("SIGTERM");
        setTimeout(() => proc.kill("SIGKILL"), 5_000).unref();
      }),
  };
}
