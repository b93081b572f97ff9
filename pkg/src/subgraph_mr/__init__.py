"""Enumerating sample-graph instances with one map-reduce round.

Modules: ``graph`` (data and sample graphs, hashing, node orders), ``cq``
(CQ generation and evaluation), ``cycles`` (run-sequence CQs), ``planner``
(cost expressions and shares), ``mapreduce`` (round simulator), ``serial``
(enumerators and the oracle), ``cli``.
"""

__version__ = "0.1.0"

from .cq import ConjunctiveQuery, CQSet, automorphisms, generate_cqs
from .cycles import RunSequence, canonical_run_sequences, cycle_cqs
from .graph import DataGraph, NodeOrder, SampleGraph, bucket_hash, edge_exists, load_edge_list, make_order
from .mapreduce import CostReport, run_round
from .planner import CostExpression, ShareAssignment, cost_expression, optimize_shares
from .generators import gnm, gnp
from .samples import clique, cycle, edge, lollipop, parse_sample, path, square, star, triangle
from .serial import Decomposition, brute_force_oracle, decompose_sample, enumerate_general, odd_cycle_enum

__all__ = [
    "CQSet", "ConjunctiveQuery", "CostExpression", "CostReport", "DataGraph", "Decomposition",
    "NodeOrder", "RunSequence", "SampleGraph", "ShareAssignment", "automorphisms", "brute_force_oracle",
    "bucket_hash", "canonical_run_sequences", "cost_expression", "cycle_cqs", "decompose_sample",
    "edge_exists", "enumerate_general", "generate_cqs", "load_edge_list", "make_order", "odd_cycle_enum",
    "optimize_shares", "parse_sample", "run_round", "gnm", "gnp",
    "clique", "cycle", "edge", "lollipop", "path", "square", "star", "triangle",
]
