"""Layer-wise analysis of pooled speech representations.

The pipeline: store layered frame tensors and alignments in a portable
container, mean-pool word spans into acoustic word embeddings per layer,
compare acoustic and lexical neighbor structure with exact KNN, and run
seeded emotion-classification experiments with concatenation or
cross-attention fusion, emitting deterministic CSV reports.
"""

from .awe import (
    AweRecord,
    FrameSpan,
    LayeredUtterance,
    build_awes,
    build_corpus_awes,
    load_awe_store_layer,
    pool_word,
    save_awe_store,
    store_layers,
    time_to_frame_span,
)
from .errors import (
    AweKitError,
    ConfigurationError,
    DegenerateVectorError,
    EmptySpanError,
    EmptyVocabularyError,
    FormatError,
    IntervalError,
    LabelError,
    LayerError,
    ParameterError,
    SequenceError,
    ShapeError,
    SplitError,
    UnknownWordError,
)
from .manifest import (
    Manifest,
    Problem,
    UtteranceEntry,
    WordAlignment,
    load_alignments,
    load_manifest,
    save_alignments,
    save_manifest,
    validate_manifest,
)
from .neighborhood import (
    EmbeddingSpace,
    LnsReport,
    NeighborSet,
    aggregate_word_types,
    build_lexical_space,
    cosine,
    jaccard,
    knn,
    lns,
    lns_layer_report,
    lns_mean,
    neighbor_table,
)
from .nn import (
    AdamState,
    CrossAttentionParams,
    FusionClassifier,
    MlpParams,
    TrainConfig,
    adam_step,
    concat_fuse,
    cross_attend,
    cross_entropy,
    cross_entropy_from_logits,
    mlp_forward,
    pool_sequence,
)
from .reports import emit_report
from .ser import (
    ALL_LAYERS,
    Dataset,
    ExperimentConfig,
    RunReport,
    SweepReport,
    assemble_dataset,
    layer_sweep,
    run_experiment,
    split,
    weighted_accuracy,
)
from .synth import generate_synthetic_corpus
from .tensorfile import read_tensor, write_tensor

__version__ = "0.1.0"
