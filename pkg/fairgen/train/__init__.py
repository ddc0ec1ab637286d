"""Training-loop configuration and orchestration."""

from fairgen.train.config import TrainRunConfig as TrainRunConfig
from fairgen.train.config import load_config as load_config
from fairgen.train.trainer import RunArtifacts as RunArtifacts
from fairgen.train.trainer import objective_report as objective_report
from fairgen.train.trainer import run as run
