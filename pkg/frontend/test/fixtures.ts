// Fixtures generated by the Python pipeline (real export + serve payloads).

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { DocDetail, GraphPayload, TopicDetail } from "../src/types.js";

const here = dirname(fileURLToPath(import.meta.url));

function load<T>(name: string): T {
  return JSON.parse(readFileSync(join(here, "fixtures", name), "utf-8")) as T;
}

export const graphFixture = (): GraphPayload => load<GraphPayload>("graph.json");
export const wordTopicFixture = (): TopicDetail => load<TopicDetail>("topic_w0.json");
export const docTopicFixture = (): TopicDetail => load<TopicDetail>("topic_d0.json");
export const docFixture = (): DocDetail => load<DocDetail>("doc_0.json");
