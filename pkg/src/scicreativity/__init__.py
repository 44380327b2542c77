"""Creativity of scientific papers from citation and topic data.

Pair creativity is disconnect times rarity; a paper's creativity aggregates
its reference pairs. Reading logs split it into the part explained by prior
reading (preparation) and the residual (inspiration), and a greedy
submodular search proposes small sets of enabling papers.
"""

from .aggregation import Aggregator, aggregate
from .corpus import (AnalysisConfig, Corpus, HierarchyError, PaperRecord, ReadingEvent, TopicHierarchy,
                     TopicNode, Violation, validate_corpus)
from .decomposition import (Decomposer, DecompositionResult, best_enabler, decompose, pair_impact, path_impact,
                            sample_enabler)
from .dependency import (citation_counts, impact_correlation, paper_level_dependency, topic_level_dependency)
from .ingest import (CoCitationIndex, ParseError, ReadingLog, build_cocitation_index, parse_papers,
                     parse_readings, parse_topic_hierarchy)
from .metrics import PairScore, PairScorer, creativity_score, paper_creativity, rarity
from .optimizer import (RewardInstance, SelectionResult, TargetSet, brute_force_select, build_reward_instance,
                        greedy_select, marginal_gain, precision, reward)
from .similarity import UndefinedDisconnect, disconnect, level_similarity, topic_pair_similarity
from .temporal import TemporalDecayModel, collect_intervals, fit_decay, influence_probability

__version__ = "0.1.0"
