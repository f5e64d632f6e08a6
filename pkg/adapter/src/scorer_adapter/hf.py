"""Backends over Hugging Face checkpoints (Whisper-style and wav2vec2/MMS).

Imports of ``transformers`` stay inside the loaders so the rest of the
adapter (and its tests) work without downloaded checkpoints.
"""

from __future__ import annotations

import numpy as np
import torch

from .config import SAMPLE_RATE
from .seq2seq import PromptCoder


class WhisperBackend:
    """Teacher forcing against a WhisperForConditionalGeneration checkpoint.

    The conditioning prefix is the tokenizer's standard special sequence
    (start-of-transcript, language, task, no-timestamps), so timestamp
    tokens are suppressed; the recorded scoring config carries the switch.
    """

    def __init__(self, model_id: str, device: str = "cpu",
                 language: str | None = "en", task: str = "transcribe"):
        from transformers import WhisperForConditionalGeneration, WhisperProcessor

        self.device = torch.device(device)
        self.processor = WhisperProcessor.from_pretrained(
            model_id, language=language, task=task
        )
        self.model = (
            WhisperForConditionalGeneration.from_pretrained(model_id)
            .to(self.device)
            .eval()
        )
        tokenizer = self.processor.tokenizer
        self.coder = PromptCoder(
            prefix_ids=tuple(tokenizer.prefix_tokens),
            eos_id=tokenizer.eos_token_id,
            encode=lambda text: tokenizer.encode(text, add_special_tokens=False),
        )

    def features(self, audio) -> torch.Tensor:
        batch = self.processor.feature_extractor(
            [np.asarray(a, dtype=np.float32) for a in audio],
            sampling_rate=SAMPLE_RATE,
            return_tensors="pt",
        )
        return batch.input_features.to(self.device)

    def zero_features(self) -> torch.Tensor:
        fe = self.processor.feature_extractor
        return torch.zeros(
            1, fe.feature_size, fe.nb_max_frames, device=self.device
        )

    @torch.no_grad()
    def decode_logits(self, features, decoder_input_ids) -> torch.Tensor:
        out = self.model(
            input_features=features,
            decoder_input_ids=decoder_input_ids.to(self.device),
        )
        return out.logits


class Wav2Vec2CtcBackend:
    """Per-frame log-probabilities from a Wav2Vec2ForCTC/MMS checkpoint."""

    def __init__(self, model_id: str, device: str = "cpu"):
        from transformers import AutoProcessor, Wav2Vec2ForCTC

        self.device = torch.device(device)
        self.processor = AutoProcessor.from_pretrained(model_id)
        self.model = Wav2Vec2ForCTC.from_pretrained(model_id).to(self.device).eval()
        tokenizer = self.processor.tokenizer
        id_to_token = {i: t for t, i in tokenizer.get_vocab().items()}
        self.vocab = [id_to_token[i] for i in range(len(id_to_token))]
        self.blank_id = self.model.config.pad_token_id

    @torch.no_grad()
    def frame_log_probs(self, audio: np.ndarray) -> np.ndarray:
        inputs = self.processor(
            np.asarray(audio, dtype=np.float32),
            sampling_rate=SAMPLE_RATE,
            return_tensors="pt",
        )
        logits = self.model(inputs.input_values.to(self.device)).logits[0]
        return torch.log_softmax(logits.to(torch.float64), dim=-1).cpu().numpy()


def load_seq2seq_backend(model_id: str, device: str = "cpu", **kwargs):
    if model_id == "toy-seq2seq":
        from .toy import ToySeq2SeqBackend

        return ToySeq2SeqBackend()
    return WhisperBackend(model_id, device=device, **kwargs)


def load_ctc_backend(model_id: str, device: str = "cpu"):
    if model_id == "toy-ctc":
        from .toy import ToyCtcBackend

        return ToyCtcBackend()
    return Wav2Vec2CtcBackend(model_id, device=device)
