"""Drive ASR models to produce zsaudio score and frame files."""

from .config import SAMPLE_RATE, AdapterConfig
from .ctc_frames import score_ctc_frames
from .seq2seq import PromptCoder, score_aqa, score_seq2seq, teacher_forced_ll

__version__ = "0.1.0"
