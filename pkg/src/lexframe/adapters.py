"""Real-model adapters behind the backend interfaces.

Everything here imports heavy dependencies lazily and is exercised only in
integration runs with downloaded checkpoints; desk-scale tests use the mocks
in :mod:`lexframe.backends`. Identifier strings are model-hub names, e.g.
``model:roberta-large`` for the infiller or ``model:roberta-large-mnli`` for
the scorer.
"""

from __future__ import annotations

from .backends import (
    MASK_TOKEN,
    ArgumentClassifier,
    EntailmentScorer,
    MaskedInfiller,
    Seq2SeqGenerator,
    SentenceEncoder,
)
from .errors import BackendError


def _require(module_name):
    import importlib

    try:
        return importlib.import_module(module_name)
    except ImportError as exc:
        raise BackendError(
            f"model backends need {module_name!r}; install the 'models' extra"
        ) from None


class HubInfiller(MaskedInfiller):
    reentrant = False

    def __init__(self, model_id: str):
        transformers = _require("transformers")
        self._pipe = transformers.pipeline("fill-mask", model=model_id)
        self._mask = self._pipe.tokenizer.mask_token

    def predict(self, text_with_mask, top_n):
        if top_n <= 0:
            return []
        text = text_with_mask.replace(MASK_TOKEN, self._mask)
        rows = self._pipe(text, top_k=top_n)
        return [(row["token_str"].strip(), float(row["score"])) for row in rows]


class HubSeq2SeqGenerator(Seq2SeqGenerator):
    reentrant = False

    def __init__(self, model_id: str):
        transformers = _require("transformers")
        self._torch = _require("torch")
        self._tokenizer = transformers.AutoTokenizer.from_pretrained(model_id)
        self._model = transformers.AutoModelForSeq2SeqLM.from_pretrained(model_id)
        self._tokenizer.add_tokens(["[DELIM]", "[SEP]"], special_tokens=False)
        self._model.resize_token_embeddings(len(self._tokenizer))

    def fine_tune(self, train_pairs, val_pairs, config):
        torch = self._torch
        epochs = int(config.get("epochs", 1))
        max_tokens = int(config.get("max_tokens_per_batch", 1024))
        torch.manual_seed(int(config.get("seed", 0)))
        optimizer = torch.optim.AdamW(self._model.parameters(), lr=3e-5)
        self._model.train()

        def batches(pairs):
            batch, batch_tokens = [], 0
            for pair in pairs:
                cost = len(self._tokenizer.encode(pair.source)) + len(
                    self._tokenizer.encode(pair.target)
                )
                if batch and batch_tokens + cost > max_tokens:
                    yield batch
                    batch, batch_tokens = [], 0
                batch.append(pair)
                batch_tokens += cost
            if batch:
                yield batch

        def step(pairs, train):
            enc = self._tokenizer(
                [p.source for p in pairs], return_tensors="pt", padding=True, truncation=True
            )
            with self._tokenizer.as_target_tokenizer():
                labels = self._tokenizer(
                    [p.target for p in pairs], return_tensors="pt", padding=True, truncation=True
                ).input_ids
            labels[labels == self._tokenizer.pad_token_id] = -100
            out = self._model(**enc, labels=labels)
            if train:
                out.loss.backward()
                optimizer.step()
                optimizer.zero_grad()
            return float(out.loss.detach()), int((labels != -100).sum())

        metrics = []
        for epoch in range(1, epochs + 1):
            for batch in batches(train_pairs):
                step(batch, train=True)
            self._model.eval()
            total_loss, total_tokens = 0.0, 0
            with torch.no_grad():
                for batch in batches(val_pairs):
                    loss, n_tokens = step(batch, train=False)
                    total_loss += loss * n_tokens
                    total_tokens += n_tokens
            self._model.train()
            ppl = float(torch.exp(torch.tensor(total_loss / max(total_tokens, 1))))
            metrics.append({"epoch": epoch, "val_perplexity": ppl})
        self._model.eval()
        return {"pair_count": len(list(train_pairs)), "epoch_metrics": metrics}

    def sample(self, source, k, seed, max_len):
        torch = self._torch
        torch.manual_seed(seed)
        enc = self._tokenizer(source, return_tensors="pt", truncation=True)
        with torch.no_grad():
            out = self._model.generate(
                **enc, do_sample=True, top_k=k, max_length=max_len, num_return_sequences=1
            )
        return self._tokenizer.decode(out[0], skip_special_tokens=True).strip()


class HubEntailmentScorer(EntailmentScorer):
    reentrant = False

    def __init__(self, model_id: str):
        transformers = _require("transformers")
        self._torch = _require("torch")
        self._tokenizer = transformers.AutoTokenizer.from_pretrained(model_id)
        self._model = transformers.AutoModelForSequenceClassification.from_pretrained(model_id)
        self._model.eval()
        labels = {v.lower(): k for k, v in self._model.config.id2label.items()}
        try:
            self._order = [labels["entailment"], labels["neutral"], labels["contradiction"]]
        except KeyError as exc:
            raise BackendError(f"{model_id} lacks an NLI label {exc}") from None

    def _score(self, premise, hypothesis):
        torch = self._torch
        enc = self._tokenizer(premise, hypothesis, return_tensors="pt", truncation=True)
        with torch.no_grad():
            probs = torch.softmax(self._model(**enc).logits[0], dim=-1)
        return tuple(float(probs[i]) for i in self._order)


class HubSentenceEncoder(SentenceEncoder):
    reentrant = False

    def __init__(self, model_id: str):
        st = _require("sentence_transformers")
        self._model = st.SentenceTransformer(model_id)
        self.dim = int(self._model.get_sentence_embedding_dimension())

    def encode(self, text):
        return self._model.encode(text, convert_to_numpy=True)


class HubArgumentClassifier(ArgumentClassifier):
    reentrant = False

    def __init__(self, model_id: str):
        transformers = _require("transformers")
        self._pipe = transformers.pipeline("text-classification", model=model_id)

    def classify(self, text):
        label = self._pipe(text)[0]["label"].lower()
        if "premise" in label:
            return "premise"
        if "claim" in label:
            return "claim"
        return "non_argument"


_ADAPTERS = {
    "infiller": HubInfiller,
    "generator": HubSeq2SeqGenerator,
    "scorer": HubEntailmentScorer,
    "encoder": HubSentenceEncoder,
    "classifier": HubArgumentClassifier,
}


def load_model_backend(kind: str, identifier: str):
    if not identifier:
        raise BackendError(f"model backend for {kind!r} needs an identifier")
    try:
        return _ADAPTERS[kind](identifier)
    except BackendError:
        raise
    except Exception as exc:
        raise BackendError(f"failed to load {kind} model {identifier!r}: {exc}") from None
