"""Read-only HTTP service exposing an exported topic web plus the UI bundle.

Endpoints:
  GET /api/graph       -> the graph JSON exactly as exported (byte-equal)
  GET /api/topic/{id}  -> one node's detail with incident edges by weight
  GET /api/doc/{id}    -> a document's snippet and posterior mixture row
  GET /...             -> static files of the exploration UI, if provided
"""

from __future__ import annotations

import json
import logging
import re
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import unquote, urlparse

import numpy as np

from .inference import e_step_document

logger = logging.getLogger(__name__)

TOPIC_ID_RE = re.compile(r"^[wd]\d+$")
SNIPPET_CHARS = 200

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".mjs": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json; charset=utf-8",
    ".map": "application/json; charset=utf-8",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".ico": "image/x-icon",
}

_FALLBACK_PAGE = b"""<!doctype html>
<html><head><meta charset="utf-8"><title>topicatlas</title></head>
<body><h1>topicatlas graph service</h1>
<p>No UI bundle configured. API endpoints:</p>
<ul><li><code>/api/graph</code></li><li><code>/api/topic/{id}</code></li>
<li><code>/api/doc/{id}</code></li></ul></body></html>
"""


class GraphService:
    """Holds the exported graph and optional corpus/model for detail views."""

    def __init__(self, graph_path, corpus=None, checkpoint=None, ui_dir=None):
        with open(graph_path, "rb") as fh:
            self.graph_bytes = fh.read()
        graph = json.loads(self.graph_bytes.decode("utf-8"))
        self.nodes = {n["id"]: n for n in graph["nodes"]}
        self.incident = {node_id: [] for node_id in self.nodes}
        for edge in graph["edges"]:
            self.incident[edge["src"]].append(edge)
            self.incident[edge["dst"]].append(edge)
        for node_id in self.incident:
            self.incident[node_id].sort(key=lambda e: (-e["weight"], e["src"], e["dst"]))
        self.corpus = corpus
        self.checkpoint = checkpoint
        self.ui_dir = Path(ui_dir).resolve() if ui_dir else None
        self._doc_pos = ({doc.id: i for i, doc in enumerate(corpus.documents)}
                         if corpus is not None else {})
        self._theta_cache = {}

    def topic_payload(self, node_id):
        node = self.nodes.get(node_id)
        if node is None:
            return None
        payload = dict(node)
        if self.corpus is not None and node.get("top_docs"):
            payload["top_docs"] = [
                {**entry, "title": self._snippet(entry["doc"])}
                for entry in node["top_docs"]
            ]
        payload["edges"] = self.incident[node_id]
        return payload

    def _snippet(self, doc_id):
        pos = self._doc_pos.get(doc_id)
        if pos is None:
            return ""
        return self.corpus.documents[pos].raw_text[:SNIPPET_CHARS]

    def doc_payload(self, doc_id):
        pos = self._doc_pos.get(doc_id)
        if pos is None or self.checkpoint is None:
            return None
        if pos not in self._theta_cache:
            params, config = self.checkpoint.params, self.checkpoint.config
            var, _ = e_step_document(self.corpus.documents[pos], params, config)
            counts = var.phi.sum(axis=0) if var.phi.size else np.zeros(params.K_w)
            theta = counts + params.alpha
            self._theta_cache[pos] = (theta / theta.sum()).tolist()
        return {
            "id": doc_id,
            "snippet": self._snippet(doc_id),
            "theta": self._theta_cache[pos],
        }

    def static_file(self, path):
        if self.ui_dir is None:
            return None
        rel = path.lstrip("/") or "index.html"
        target = (self.ui_dir / rel).resolve()
        if not target.is_relative_to(self.ui_dir) or not target.is_file():
            return None
        ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
        return target.read_bytes(), ctype


class _Handler(BaseHTTPRequestHandler):
    service: GraphService = None

    def log_message(self, fmt, *args):
        logger.debug("serve: " + fmt, *args)

    def _send(self, status, body, ctype="application/json; charset=utf-8"):
        self.send_response(status)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, status, obj):
        self._send(status, json.dumps(obj, sort_keys=True).encode("utf-8"))

    def do_GET(self):
        path = unquote(urlparse(self.path).path)
        if path == "/api/graph":
            self._send(200, self.service.graph_bytes)
            return
        if path.startswith("/api/topic/"):
            topic_id = path[len("/api/topic/"):]
            if not TOPIC_ID_RE.match(topic_id):
                self._send_json(400, {"error": f"malformed topic id {topic_id!r}"})
                return
            payload = self.service.topic_payload(topic_id)
            if payload is None:
                self._send_json(404, {"error": f"unknown topic {topic_id!r}"})
            else:
                self._send_json(200, payload)
            return
        if path.startswith("/api/doc/"):
            doc_id = path[len("/api/doc/"):]
            if not doc_id:
                self._send_json(400, {"error": "malformed document id"})
                return
            payload = self.service.doc_payload(doc_id)
            if payload is None:
                self._send_json(404, {"error": f"unknown document {doc_id!r}"})
            else:
                self._send_json(200, payload)
            return
        if path.startswith("/api/"):
            self._send_json(404, {"error": "unknown endpoint"})
            return
        hit = self.service.static_file(path)
        if hit is not None:
            body, ctype = hit
            self._send(200, body, ctype)
        elif path == "/" or path == "/index.html":
            self._send(200, _FALLBACK_PAGE, "text/html; charset=utf-8")
        else:
            self._send(404, b"not found", "text/plain; charset=utf-8")


def make_server(graph_path, corpus=None, checkpoint=None, ui_dir=None,
                host="127.0.0.1", port=8000):
    """Build (but do not start) the HTTP server; caller owns its lifecycle."""
    service = GraphService(graph_path, corpus, checkpoint, ui_dir)
    handler = type("BoundHandler", (_Handler,), {"service": service})
    return ThreadingHTTPServer((host, port), handler)
