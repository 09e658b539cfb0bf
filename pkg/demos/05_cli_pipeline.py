"""Drive the full command-line pipeline: train, export the web, evaluate.

Every command writes a manifest capturing its configuration and input/output
hashes, and the exported graph is pinned to the corpus the model was fit on.
The last step prints the serve command that feeds the interactive UI.
"""

import json
import tempfile
from pathlib import Path

import numpy as np

from topicatlas import ModelParams, generate_corpus
from topicatlas.cli import main

workdir = Path(tempfile.mkdtemp(prefix="topicatlas_demo_"))
print(f"working in {workdir}\n")

# Synthesize a small citation-style network and dump it as JSON records.
rng = np.random.default_rng(11)
K, V, D = 2, 16, 14
mats = [rng.random((K, V)) + 0.1, rng.random((K, K)) + 0.1, rng.random((K, D)) + 0.1]
beta, eta, omega = (m / m.sum(axis=1, keepdims=True) for m in mats)
truth = ModelParams(np.full(K, 0.15), beta, eta, omega)
corpus = generate_corpus(truth, [25] * D, [4] * D, seed=12)

records = workdir / "network.jsonl"
with open(records, "w", encoding="utf-8") as fh:
    for doc in corpus.documents:
        fh.write(json.dumps({
            "id": doc.id,
            "text": doc.raw_text,
            "links": [corpus.documents[j].id for j in doc.link_tokens],
        }) + "\n")

run_dir = workdir / "run"
assert main(["train", str(records), "--out", str(run_dir),
             "--kw", "2", "--ky", "2", "--min-count", "1",
             "--outer-iters", "8", "--seed", "1"]) == 0

manifest = json.loads((run_dir / "manifest.json").read_text())
print(f"\nmanifest pins corpus {manifest['hashes']['corpus'][:12]} "
      f"and model {manifest['hashes']['model'][:12]}")

graph = workdir / "web.json"
assert main(["export-web", str(run_dir / "model.bin"), str(records),
             "--out", str(graph), "--min-count", "1",
             "--prior", "auto", "--threshold", "1.0"]) == 0

assert main(["evaluate", str(records), "--out", str(workdir / "eval"),
             "--folds", "3", "--min-links", "1",
             "--kw", "2", "--ky", "2", "--min-count", "1",
             "--outer-iters", "4", "--seed", "2"]) == 0

print("\nartifacts:")
for path in sorted(workdir.rglob("*")):
    if path.is_file():
        print(f"  {path.relative_to(workdir)}")

print("\nto explore interactively (after building frontend/dist):")
print(f"  topicatlas serve {graph} --corpus {records} "
      f"--model {run_dir / 'model.bin'} --ui frontend/dist --port 8000")
