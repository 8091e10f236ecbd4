/** Thin fetch client for the scene service; the only way data gets in. */

import {
  errorSchema,
  journalSchema,
  modelSchema,
  sceneSchema,
  sessionSchema,
  textResponseSchema,
} from "./wire";
import type {
  JournalWire,
  ModelWire,
  SceneWire,
  SessionWire,
  TextResponseWire,
} from "./wire";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly span?: [number, number]
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class Client {
  /** Model boxes never change server-side; fetch each id once. */
  private models = new Map<string, Promise<ModelWire>>();

  constructor(
    readonly baseUrl: string,
    private fetchImpl: FetchLike = (input, init) => fetch(input, init)
  ) {}

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    const res = await this.fetchImpl(this.baseUrl + path, init);
    if (!res.ok) {
      let parsed;
      try {
        parsed = errorSchema.parse(await res.json());
      } catch {
        throw new ApiError(res.status, "http_error", `HTTP ${res.status} on ${path}`);
      }
      throw new ApiError(res.status, parsed.code, parsed.message, parsed.span);
    }
    return res.json();
  }

  private post(path: string, body: unknown): Promise<unknown> {
    return this.request(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  async createSession(
    opts: { seed?: number; condition?: string } = {}
  ): Promise<SessionWire> {
    return sessionSchema.parse(await this.post("/sessions", opts));
  }

  async sendText(sessionId: string, text: string): Promise<TextResponseWire> {
    return textResponseSchema.parse(
      await this.post(`/sessions/${sessionId}/text`, { text })
    );
  }

  async getScene(sessionId: string): Promise<SceneWire> {
    return sceneSchema.parse(await this.request(`/sessions/${sessionId}/scene`));
  }

  async getJournal(sessionId: string): Promise<JournalWire> {
    return journalSchema.parse(await this.request(`/sessions/${sessionId}/journal`));
  }

  getModel(modelId: string): Promise<ModelWire> {
    let pending = this.models.get(modelId);
    if (!pending) {
      pending = this.request(`/catalog/models/${modelId}`)
        .then((raw) => modelSchema.parse(raw))
        .catch((err) => {
          this.models.delete(modelId);
          throw err;
        });
      this.models.set(modelId, pending);
    }
    return pending;
  }

  /** Every catalog entry a scene payload refers to, keyed by model id. */
  async modelsFor(scene: SceneWire): Promise<Map<string, ModelWire>> {
    const ids = [...new Set(scene.instances.map((inst) => inst.modelId))];
    const fetched = await Promise.all(ids.map((id) => this.getModel(id)));
    return new Map(ids.map((id, k) => [id, fetched[k]!]));
  }

  async healthz(): Promise<boolean> {
    try {
      const res = await this.fetchImpl(this.baseUrl + "/healthz");
      return res.ok;
    } catch {
      return false;
    }
  }
}
