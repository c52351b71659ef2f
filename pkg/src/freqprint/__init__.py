"""Application fingerprinting from DVFS frequency-state and EM traces.

The package covers the full pipeline: synthetic corpus generation
(governor simulator + toy EM emitter), on-disk trace formats,
preprocessing, windowed spectral features with per-window PCA, three
classifiers behind one probability contract, window-incremental detection
latency, and threshold-based open-set evaluation.
"""

from .classifiers import (
    EvalResult,
    KnnClassifier,
    LinearSvmClassifier,
    RandomForestClassifier,
    evaluate,
    evaluate_runs,
)
from .detect import (
    DetectionReport,
    OpenSetReport,
    classify_with_rejection,
    detection_latency,
    open_set_eval,
)
from .errors import FreqprintError
from .model import (
    UNKNOWN_ID,
    UNKNOWN_LABEL,
    ClusterSamples,
    DatasetSplit,
    DvfsTrace,
    EmTrace,
    FeatureKind,
    FeatureMatrix,
    FrequencyTable,
    LabelCodec,
    UniformSeries,
    default_tables,
    freq_to_index,
    global_index,
)
from .pca import PcaModel, WindowedPca, apply_pca, fit_windowed_pca
from .pipeline import (
    PIPELINES,
    DvfsFeatureParams,
    EmFeatureParams,
    FeatureSet,
    build_dvfs_features,
    build_em_features,
    build_features,
)
from .preprocess import append_clusters, interpolate_dvfs, resample_em, split_dataset
from .simulate import (
    GovernorConfig,
    Segment,
    WorkloadProfile,
    default_profiles,
    generate_corpus,
    simulate_governor,
    synthesize_em,
)
from .spectral import FeatureLayout, WindowPlan, fft_radix2, windowed_spectrum
from .trace_io import (
    CorpusManifest,
    load_corpus,
    read_dvfs_log,
    read_em_trace,
    save_corpus,
    write_dvfs_log,
    write_em_trace,
)

__version__ = "0.1.0"
