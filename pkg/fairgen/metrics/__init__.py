"""Graph statistics, original-vs-generated discrepancies and reference generators."""

from fairgen.metrics.baselines import ba_generate as ba_generate
from fairgen.metrics.baselines import er_generate as er_generate
from fairgen.metrics.discrepancy import metric_report as metric_report
from fairgen.metrics.discrepancy import overall_discrepancy as overall_discrepancy
from fairgen.metrics.discrepancy import protected_discrepancy as protected_discrepancy
from fairgen.metrics.oracles import brute_force_oracles as brute_force_oracles
from fairgen.metrics.stats import Metric as Metric
from fairgen.metrics.stats import MetricUndefinedError as MetricUndefinedError
from fairgen.metrics.stats import metric as metric
