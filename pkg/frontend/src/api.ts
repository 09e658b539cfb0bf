// Read-only API client with in-flight cancellation: navigating to a new
// topic aborts the previous detail fetch.

import { DocDetail, GraphPayload, TopicDetail } from "./types.js";

export class ApiClient {
  private controllers = new Map<string, AbortController>();

  constructor(private base = "") {}

  private async get<T>(path: string, channel: string): Promise<T> {
    this.controllers.get(channel)?.abort();
    const controller = new AbortController();
    this.controllers.set(channel, controller);
    const response = await fetch(this.base + path, { signal: controller.signal });
    if (!response.ok) {
      throw new Error(`${path}: HTTP ${response.status}`);
    }
    return (await response.json()) as T;
  }

  fetchGraph(): Promise<GraphPayload> {
    return this.get<GraphPayload>("/api/graph", "graph");
  }

  fetchTopic(id: string): Promise<TopicDetail> {
    return this.get<TopicDetail>(`/api/topic/${id}`, "detail");
  }

  fetchDoc(id: string): Promise<DocDetail> {
    return this.get<DocDetail>(`/api/doc/${encodeURIComponent(id)}`, "detail");
  }
}
