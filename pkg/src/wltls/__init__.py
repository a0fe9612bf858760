"""Wide trellis output codes for extreme multiclass classification."""
from .assignment import ClassAssignment, assign_random
from .data import Dataset, ParseError, SparseVector, load_libsvm, parse_libsvm, shuffle, split
from .decoder import (DecodeResult, EdgeWeights, decode, decode_batch, decode_exhaustive,
                      decode_heaviest, decode_margins, edge_weights, shortest_path)
from .evaluation import (SweepReport, accuracy, avg_binary_loss, error_bound, select_b, sweep,
                         train_model)
from .kernels import BACKEND
from .learner import (ArowState, MarginModel, TrainConfig, arow_update, binary_label, margins,
                      train_all)
from .losses import LossKind, loss, loss_at_zero
from .model import (PruneReport, WltlsModel, load, model_stats, prune, save, tune_prune)
from .trellis import (TrellisGraph, build_graph, code_matrix, codeword, count_paths,
                      edge_count_bound, index_to_path, min_hamming_distance, path_to_index, s_set)

__version__ = "0.1.0"
