from hourglassdoc.bench.macs import MacReport, count_macs_vanilla, count_macs_graph, layer_macs, scale_lengths
from hourglassdoc.bench.timing import BenchResult, run_benchmark
from hourglassdoc.bench.redundancy import (RedundancyRow, attention_redundancy_stat, write_redundancy_csv,
                                           dump_attention)
from hourglassdoc.bench.metrics import labeling_metrics, linking_metrics
from hourglassdoc.bench.trainer import TrainHistory, train_loop, evaluate

__all__ = ["MacReport", "count_macs_vanilla", "count_macs_graph", "layer_macs", "scale_lengths",
           "BenchResult", "run_benchmark",
           "RedundancyRow", "attention_redundancy_stat", "write_redundancy_csv", "dump_attention",
           "labeling_metrics", "linking_metrics",
           "TrainHistory", "train_loop", "evaluate"]
