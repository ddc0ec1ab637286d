"""Walk generator g_theta, skip-gram pretraining and checkpoint codec."""

from fairgen.generator.checkpoint import load_checkpoint as load_checkpoint
from fairgen.generator.checkpoint import save_checkpoint as save_checkpoint
from fairgen.generator.sequence import GeneratorModel as GeneratorModel
from fairgen.generator.sequence import generate_walks as generate_walks
from fairgen.generator.sequence import next_node_distribution as next_node_distribution
from fairgen.generator.sequence import train_generator as train_generator
from fairgen.generator.sequence import walk_log_likelihood as walk_log_likelihood
from fairgen.generator.skipgram import pretrain_embeddings as pretrain_embeddings
