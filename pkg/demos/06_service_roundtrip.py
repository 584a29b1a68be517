#!/usr/bin/env python3
"""Drive the REST API end to end against an in-process app: health, seeded
generation with highlights and a retrieved reference, then save, rate,
comment, and list.

Uses a briefly-trained model so it runs in about a minute; the CLI `serve`
command exposes the identical endpoints over a real socket.
"""

from fastapi.testclient import TestClient

from recipelab import bundled_corpus_path
from recipelab.corpus import load_filtered_corpus, split_corpus
from recipelab.fieldcodec import train_bpe
from recipelab.model import ModelConfig, TrainConfig, train
from recipelab.service import AppState, create_app
from recipelab.store import GenerationStore

records, _ = load_filtered_corpus(bundled_corpus_path())
split = split_corpus(records, seed=7, n_val=10, n_test=10)
by_id = {r.id: r for r in records}
texts = [r.title + "\n" + "\n".join(l.name_phrase for l in r.ingredients)
         + "\n" + " ".join(r.steps) for r in records]
vocab = train_bpe(texts, merge_count=4096)
config = ModelConfig(vocab_size=vocab.vocab_size)
print("training a quick model (100 steps)…")
params, _ = train(config, vocab, [by_id[i] for i in split.train],
                  [by_id[i] for i in split.validation], TrainConfig(steps=100))

state = AppState(api_key="demo-key", records=records, vocab=vocab,
                 params=params, config=config,
                 store=GenerationStore("/tmp/recipelab-demo-generations.log"))
client = TestClient(create_app(state))
auth = {"x-api-key": "demo-key"}

print("\n== GET /v1/health ==")
print(" ", client.get("/v1/health").json())

print("\n== POST /v1/generate (seeded) ==")
request = {
    "mode": "instructions",
    "title": "Rustic Mushroom Pasta",
    "ingredients": ["8 ounces penne", "2 cups mushrooms", "2 cloves garlic", "1/4 cup parmesan"],
    "k": 3,
    "seed": 7,
}
body = client.post("/v1/generate", json=request, headers=auth).json()
print(f"  output: {body['output'][:120]}…")
print(f"  truncated={body['truncated']} highlights={len(body['highlights'])} "
      f"elapsed={body['elapsed_ms']:.0f}ms")
if body["reference"]:
    print(f"  reference: {body['reference']['recipe']['title']} "
          f"(score {body['reference']['score']:.2f})")
if body["report"]:
    print(f"  report: bleu={body['report']['bleu']:.3f} nted={body['report']['nted']:.3f} "
          f"coherence={body['report']['jaccard_coherence']:.3f}")

print("\n== save -> rate -> comment -> list ==")
saved = client.post("/v1/generations", json={
    "mode": request["mode"],
    "context": {"title": request["title"], "ingredients": "\n".join(request["ingredients"])},
    "output": body["output"],
    "sampling": body["sampling"],
    "report": body["report"],
    "reference_id": (body["reference"] or {}).get("recipe", {}).get("id"),
}, headers=auth).json()
print(f"  saved generation id {saved['id']}")
client.post(f"/v1/generations/{saved['id']}/rating", json={"value": 4}, headers=auth)
client.post(f"/v1/generations/{saved['id']}/comments",
            json={"text": "coherent for a toy model"}, headers=auth)
full = client.get(f"/v1/generations/{saved['id']}", headers=auth).json()
print(f"  ratings={[(r['value']) for r in full['ratings']]} "
      f"comments={[c['text'] for c in full['comments']]}")
listing = client.get("/v1/generations", headers=auth).json()
print(f"  list shows {listing['total']} saved generation(s)")

print("\n== error envelope ==")
bad = client.post("/v1/generate", json=request)  # no key
print(f"  no key -> {bad.status_code} {bad.json()['error']['code']}")
