from .autoencoder import (
    AutoencoderParams,
    encode,
    encode_batches,
    load_checkpoint,
    loss_and_grads,
    save_checkpoint,
    train_autoencoder,
)
from .batching import SequenceBatch, make_batches
from .pipeline import EmbedCache, EmbedConfig, EmbeddingResult, embed_pipeline
from .tsne import TsneResult, conditional_probabilities, project_tsne

__all__ = [
    "AutoencoderParams",
    "EmbedCache",
    "EmbedConfig",
    "EmbeddingResult",
    "SequenceBatch",
    "TsneResult",
    "conditional_probabilities",
    "embed_pipeline",
    "encode",
    "encode_batches",
    "load_checkpoint",
    "loss_and_grads",
    "make_batches",
    "project_tsne",
    "save_checkpoint",
    "train_autoencoder",
]
