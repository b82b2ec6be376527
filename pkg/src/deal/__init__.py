"""Dual-encoder graph embeddings with alignment for inductive and transductive link prediction."""

from .encoders import (AttrEncoderParams, EmbeddingMatrix, StructEncoderParams, cosine_similarity,
                       encode_attributes, encode_structure)
from .evaluation import (Metrics, SplitRecipe, auc, average_precision, evaluate,
                         hop_similarity_profile, link_score, run_trials)
from .graph import (AttributedGraph, DistanceCache, SplitSpec, load_graph, shortest_path_distances,
                    split_inductive, split_transductive)
from .loss import (HyperParams, MiniBatch, generalized_logistic, loose_align_loss, negative_weight,
                   ranking_loss, tight_align_loss, total_loss)
from .model import TrainedModel, load_checkpoint, save_checkpoint
from .training import TrainConfig, sample_minibatch, train

__version__ = "0.1.0"
