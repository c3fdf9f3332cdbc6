"""Two-lead ECG beat classification.

A beat window is lifted into an 18-row time/frequency embedding (wavelet
band projections, denoised reconstruction, Fourier magnitude and phase)
and classified by a deep-narrow transformer trained with hand-written
backpropagation. See the CLI in `ldtf.cli` for the end-to-end pipeline.
"""

from .aami import AamiClass, map_symbol_to_aami
from .embedding import (
    LdeEmbedding,
    WaveletFilterPair,
    WaveletPyramid,
    band_to_full_length,
    dft_features,
    dwt_decompose,
    dwt_reconstruct,
    embed,
    embed_dataset,
    get_filters,
)
from .evaluate import EvalReport, confusion_matrix, recall_precision
from .model import (
    ModelConfig,
    ModelParams,
    TrainHistory,
    attention_head,
    count_params,
    encoder_layer_forward,
    init_params,
    loss_and_grads,
    mab_forward,
    model_forward,
    sgd_step,
    train,
)
from .preprocess import Dataset, smote, split_train_test, zscore
from .records import (
    EcgRecord,
    RecordHeader,
    Segment,
    SynthSpec,
    extract_segments,
    parse_annotations,
    parse_header,
    parse_signal_212,
    synth_record,
)

__version__ = "0.1.0"

__all__ = [
    "AamiClass", "map_symbol_to_aami",
    "LdeEmbedding", "WaveletFilterPair", "WaveletPyramid",
    "band_to_full_length", "dft_features", "dwt_decompose", "dwt_reconstruct",
    "embed", "embed_dataset", "get_filters",
    "EvalReport", "confusion_matrix", "recall_precision",
    "ModelConfig", "ModelParams", "TrainHistory",
    "attention_head", "count_params", "encoder_layer_forward", "init_params",
    "loss_and_grads", "mab_forward", "model_forward", "sgd_step", "train",
    "Dataset", "smote", "split_train_test", "zscore",
    "EcgRecord", "RecordHeader", "Segment", "SynthSpec",
    "extract_segments", "parse_annotations", "parse_header",
    "parse_signal_212", "synth_record",
    "__version__",
]
