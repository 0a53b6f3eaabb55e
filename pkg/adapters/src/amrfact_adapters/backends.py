"""Backends behind the protocol server.

``EchoBackend`` is the wiring stub: fixed scores, identity bridge, no
dependencies. ``TransformersBackend`` wraps pretrained checkpoints for
real scoring; it imports torch and transformers lazily so the stub
works on a bare install.
"""
from __future__ import annotations


class BackendError(Exception):
    """A backend cannot be constructed or a task cannot be served."""


class EchoBackend:
    """Fixed answers for exercising the protocol end to end.

    Every entailment request scores 0.5 and every relevance request
    -1.0, values that sit strictly inside the default filter thresholds
    so a wired-up pipeline keeps all candidates. Bridge tasks return
    their input unchanged.
    """

    def score(self, task: str, premise: str, hypothesis: str) -> float:
        return 0.5 if task == "entailment" else -1.0

    def translate(self, task: str, text: str) -> str:
        return text


class TransformersBackend:
    """Entailment and relevance scoring with pretrained checkpoints.

    ``nli_model`` names a sequence-classification checkpoint whose
    labels include "entailment"; the score is that label's softmax
    probability, computed without sampling, so identical requests give
    identical scores. ``relevance_model`` optionally names a seq2seq
    checkpoint scored as the mean token log-likelihood of the
    hypothesis given the premise (higher is more relevant, zero is the
    ceiling). Checkpoints load eagerly in the constructor so a missing
    dependency or model fails before any protocol output.
    """

    def __init__(
        self,
        nli_model: str,
        relevance_model: str | None = None,
        device: str = "cpu",
    ):
        try:
            import torch
            from transformers import (
                AutoModelForSeq2SeqLM,
                AutoModelForSequenceClassification,
                AutoTokenizer,
            )
        except ImportError as exc:
            raise BackendError(
                "model-backed scoring needs torch and transformers"
                " (install the 'models' extra)"
            ) from exc
        self._torch = torch
        self.device = device
        try:
            self.nli_tokenizer = AutoTokenizer.from_pretrained(nli_model)
            self.nli = AutoModelForSequenceClassification.from_pretrained(nli_model)
        except Exception as exc:
            raise BackendError(f"cannot load NLI model {nli_model!r}: {exc}") from exc
        self.nli.to(device)
        self.nli.eval()
        self.entailment_index = find_entailment_index(self.nli.config)
        self.relevance_tokenizer = None
        self.relevance = None
        if relevance_model is not None:
            try:
                self.relevance_tokenizer = AutoTokenizer.from_pretrained(relevance_model)
                self.relevance = AutoModelForSeq2SeqLM.from_pretrained(relevance_model)
            except Exception as exc:
                raise BackendError(
                    f"cannot load relevance model {relevance_model!r}: {exc}"
                ) from exc
            self.relevance.to(device)
            self.relevance.eval()

    def score(self, task: str, premise: str, hypothesis: str) -> float:
        if task == "entailment":
            return self._entailment_probability(premise, hypothesis)
        if task == "relevance":
            if self.relevance is None:
                raise BackendError("no relevance model loaded")
            return self._mean_log_likelihood(premise, hypothesis)
        raise BackendError(f"unsupported task {task!r}")

    def translate(self, task: str, text: str) -> str:
        raise BackendError("this backend has no text/graph bridge")

    def _entailment_probability(self, premise: str, hypothesis: str) -> float:
        torch = self._torch
        batch = self.nli_tokenizer(
            premise, hypothesis, return_tensors="pt", truncation=True
        ).to(self.device)
        with torch.no_grad():
            logits = self.nli(**batch).logits[0]
        return float(torch.softmax(logits, dim=-1)[self.entailment_index])

    def _mean_log_likelihood(self, premise: str, hypothesis: str) -> float:
        torch = self._torch
        encoder_input = self.relevance_tokenizer(
            premise, return_tensors="pt", truncation=True
        ).to(self.device)
        target = self.relevance_tokenizer(
            text_target=hypothesis, return_tensors="pt", truncation=True
        ).to(self.device)
        with torch.no_grad():
            loss = self.relevance(**encoder_input, labels=target["input_ids"]).loss
        return float(-loss)


def find_entailment_index(config) -> int:
    """Locate the "entailment" label in a classification head config."""
    for index, label in getattr(config, "id2label", {}).items():
        if str(label).lower() == "entailment":
            return int(index)
    raise BackendError("NLI model labels do not include 'entailment'")
