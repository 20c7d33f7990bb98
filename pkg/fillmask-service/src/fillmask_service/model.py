"""Model loading and probability scoring.

One checkpoint per process. The checkpoint's head decides the capability:
masked models answer fill-mask requests, causal models answer next-word
requests, and the other route is rejected.
"""

from __future__ import annotations

import threading

import torch
from transformers import AutoModelForCausalLM, AutoModelForMaskedLM, AutoTokenizer

from .config import ServiceConfig

MASKED = "masked"
CAUSAL = "causal"


class ModelLoadError(RuntimeError):
    """Checkpoint could not be loaded; the process must not start serving."""


class BadRequest(ValueError):
    """Request violates the scoring contract; mapped to HTTP 400."""


class ClozeModel:
    """A loaded checkpoint plus the two scoring operations of the protocol."""

    def __init__(self, config: ServiceConfig):
        self.model_id = config.model
        self.device = torch.device(config.device)
        # Forward passes share model state; serialize them, let request
        # handling overlap everywhere else.
        self._forward_lock = threading.Lock()
        try:
            self.tokenizer = AutoTokenizer.from_pretrained(config.model)
        except Exception as exc:
            raise ModelLoadError(f"cannot load tokenizer for {config.model!r}: {exc}") from exc
        try:
            self.model = AutoModelForMaskedLM.from_pretrained(config.model)
            self.capability = MASKED
        except ValueError:
            try:
                self.model = AutoModelForCausalLM.from_pretrained(config.model)
                self.capability = CAUSAL
            except Exception as exc:
                raise ModelLoadError(
                    f"{config.model!r} is neither a masked nor a causal LM: {exc}"
                ) from exc
        except Exception as exc:
            raise ModelLoadError(f"cannot load model {config.model!r}: {exc}") from exc
        if self.capability == MASKED and self.tokenizer.mask_token is None:
            raise ModelLoadError(f"{config.model!r} tokenizer defines no mask token")
        self.model.to(self.device)
        self.model.eval()

    # --- distributions ---------------------------------------------------

    def _mask_distribution(self, text: str, mask_sentinel: str) -> torch.Tensor:
        if not mask_sentinel:
            raise BadRequest("mask_sentinel must be non-empty")
        occurrences = text.count(mask_sentinel)
        if occurrences != 1:
            raise BadRequest(
                f"text must contain the mask sentinel exactly once, found {occurrences}"
            )
        prompt = text.replace(mask_sentinel, self.tokenizer.mask_token)
        encoded = self.tokenizer(prompt, return_tensors="pt").to(self.device)
        positions = (encoded["input_ids"][0] == self.tokenizer.mask_token_id).nonzero()
        if len(positions) != 1:
            raise BadRequest(
                f"prompt must tokenize to exactly one mask position, found {len(positions)}"
            )
        with self._forward_lock, torch.no_grad():
            logits = self.model(**encoded).logits
        return torch.softmax(logits[0, positions.item()], dim=-1)

    def _next_word_distribution(self, context: str) -> torch.Tensor:
        if not context.strip():
            raise BadRequest("context must be non-empty")
        # No special tokens: a trailing separator would own the final position.
        encoded = self.tokenizer(
            context, return_tensors="pt", add_special_tokens=False
        ).to(self.device)
        if encoded["input_ids"].shape[1] == 0:
            raise BadRequest("context tokenizes to nothing")
        with self._forward_lock, torch.no_grad():
            logits = self.model(**encoded).logits
        return torch.softmax(logits[0, -1], dim=-1)

    # --- candidate resolution ----------------------------------------------

    def _single_token_ids(self, word: str, leading_space: bool) -> list[int]:
        """Vocabulary ids for a candidate: as sent, lowercased if distinct,
        and (for next-word scoring) the space-prefixed spellings BPE
        vocabularies use for word-initial tokens. Multi-token or unknown
        spellings are dropped."""
        variants = [word]
        if word.lower() != word:
            variants.append(word.lower())
        if leading_space:
            variants.extend(" " + v for v in list(variants))
        ids = []
        for variant in variants:
            encoded = self.tokenizer.encode(variant, add_special_tokens=False)
            if len(encoded) != 1:
                continue
            if encoded[0] == self.tokenizer.unk_token_id:
                continue
            if encoded[0] not in ids:
                ids.append(encoded[0])
        return ids

    def _score(self, probs: torch.Tensor, top_k: int, candidates, leading_space: bool):
        if candidates is not None:
            tokens = []
            for word in candidates:
                ids = self._single_token_ids(word, leading_space)
                if ids:
                    tokens.append(
                        {"token": word, "prob": max(probs[i].item() for i in ids)}
                    )
                else:
                    tokens.append({"token": word, "prob": 0.0, "oov": True})
            return tokens
        k = min(top_k, probs.shape[-1])
        values, indices = torch.topk(probs, k)
        tokens = []
        for prob, index in zip(values.tolist(), indices.tolist()):
            text = self.tokenizer.decode([index]).strip()
            tokens.append({"token": text or self.tokenizer.convert_ids_to_tokens(index), "prob": prob})
        return tokens

    # --- protocol operations -------------------------------------------------

    def fill_mask(self, text: str, mask_sentinel: str, top_k: int, candidates=None):
        if self.capability != MASKED:
            raise BadRequest(f"model {self.model_id!r} does not support fill-mask")
        probs = self._mask_distribution(text, mask_sentinel)
        return self._score(probs, top_k, candidates, leading_space=False)

    def next_word(self, context: str, top_k: int, candidates=None):
        if self.capability != CAUSAL:
            raise BadRequest(f"model {self.model_id!r} does not support next-word")
        probs = self._next_word_distribution(context)
        return self._score(probs, top_k, candidates, leading_space=True)
