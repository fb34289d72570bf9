"""perconet: percolation tools for preparing measurement-based quantum resources.

Three layers:

* classical percolation on finite lattices (``lattice``, ``percolation``,
  ``events``): seeded sampling, cluster labeling, crossing events, the
  renormalization block-event family, and block-size search;
* graph states and their measurement calculus (``graphstate``, ``oracle``):
  Z/Y/X rewrite rules, star fusion, and an exact statevector oracle that
  certifies every rewrite on small instances;
* resource extraction and entanglement percolation (``renorm``, ``walls``,
  ``entanglement``): turning a percolated sample into a renormalized
  hexagonal-lattice graph state with an explicit measurement schedule, and
  the strategy comparisons for networks of partially entangled pairs.

``perconet.cli`` provides the ``perconet`` batch experiment runner.
"""

__version__ = "0.1.0"

from .entanglement import (LAMBDA1_STAR, ProcrusteanFilter, SchmidtPair,
                           SquareDistillResult, SquareDoubleReport,
                           StrategyReport, SwapOutcome, TwoQubitMatrix,
                           bell_measurement, chain_concurrence, expected_scp,
                           hex_to_tri, hex_to_tri_sweep, hex_to_tri_window,
                           procrustean_filter, scp, square_distill,
                           square_double_compare, swap)
from .events import (EVENT_NAMES, BlockSizeResult, BlockSizeSearchError,
                     EventEstimate, block_size_search, estimate_event_probability,
                     evaluate_event, find_block_size, u_subevents)
from .graphstate import (FusionOutcome, GraphState, MeasurementSchedule,
                         apply_schedule, eliminate_triangle, fuse, fuse_stars,
                         local_complement, measure_x, measure_y, measure_z,
                         shrink_path, star)
from .lattice import (BOND_THRESHOLDS, KINDS, SITE_THRESHOLDS, Block, Lattice,
                      bond_threshold, covering_lattice, doubled_square,
                      enumerate_blocks, face_sites, geometry, neighbors,
                      slab_lattice)
from .oracle import (Statevector, both_outcomes, build_graph_state,
                     check_stabilizers, measure_pauli, verify_rewrite)
from .percolation import (ClusterLabeling, MCEstimate, PercolationSample,
                          count_edge_disjoint_crossings, crossing_exists,
                          crossing_probability, label_clusters,
                          largest_cluster_scaling, region_crossing_clusters,
                          region_labels, resource_bound, sample, theta_estimate)
from .renorm import (ExtractionError, ExtractionResult, PathPlan,
                     ReductionPlan, extract, hexagonal_topology_matches,
                     reduce_to_hexagonal, sample_graph, suppressed_form)

__all__ = [name for name in dir() if not name.startswith("_")]
