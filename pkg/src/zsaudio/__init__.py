"""Calibrated zero-shot classification from ASR label-sequence scores."""

from .calibration import (
    CalibrationWeights,
    all_label_calibration_gap,
    identity_weights,
    null_input_weights,
    output_prior,
    prior_match,
    reweight,
    reweight_matrix,
    top1_calibration_gap,
    uniform_prior,
)
from .ctc import (
    CtcFrameLogits,
    CtcLabelSequence,
    build_vocab_map,
    ctc_forward,
    ctc_score_matrix,
    tokenize_label,
)
from .errors import (
    AlignmentError,
    ArityError,
    ConvergenceError,
    DegenerateInputError,
    FormatError,
    InfeasiblePriorError,
    MissingGoldError,
    OovError,
    ToolkitError,
    UnsupportedError,
)
from .evaluation import EvalReport, PrPoint, evaluate, precision_recall_curve, random_baseline
from .nullaudio import NullInputSpec, generate_null_audio
from .pipeline import PipelineConfig, render_report, run_pipeline, write_reports
from .scores import (
    DEFAULT_PROMPTS,
    LabelSet,
    PosteriorSet,
    Prediction,
    PromptTemplate,
    ScoreMatrix,
    ensemble,
    posterior,
    posterior_matrix,
    posteriors,
    predict,
    predictions,
    render_prompt,
)
from .synth import SynthConfig, SyntheticInstance, gen_instance, write_instance

__version__ = "0.1.0"
