"""Punctuation restoration as token classification.

Preprocessing, sub-word encoding with label masking, compound-sentence
batching, pluggable tagger backends, and a full evaluation suite including
the human-baseline protocol.
"""

from .corpus import (
    ClassCounts,
    CleanDocument,
    Dataset,
    LabeledDocument,
    LabeledWord,
    PunctClass,
    RawDocument,
    SplitConfig,
    dataset_stats,
    extract_labels,
    normalize,
    split_dataset,
)
from .tokenizer import EncodedSequence, Vocab, apply_tags, encode_compound, wordpiece_tokenize
from .batcher import BatchPlan, CompoundSentence, group_sentences, mark_trivial_finals, plan_dataset
from .tagger import (
    ContextWindowModel,
    LogitRecord,
    ReplayBackend,
    TrainingConfig,
    export_logits,
    featurize,
    forward,
    loss_and_grad,
    predict,
    replay_logits,
    train,
)
from .evaluation import (
    ClassMetrics,
    ConfusionMatrix4,
    EvalReport,
    confusion,
    debias_batch_final,
    empty_balance,
    f1_score,
    metrics,
)
from .humaneval import (
    AnnotatedReturn,
    CohortStats,
    HumanTest,
    ParticipantReport,
    cohort_stats,
    generate_tests,
    score_annotation,
)

__version__ = "0.1.0"
