"""Fair learner: discriminator losses, statistical parity and self-paced selection."""

from fairgen.fair.discriminator import Discriminator as Discriminator
from fairgen.fair.discriminator import cost_weight as cost_weight
from fairgen.fair.discriminator import fairness_loss as fairness_loss
from fairgen.fair.discriminator import label_prop_loss as label_prop_loss
from fairgen.fair.discriminator import parity_terms as parity_terms
from fairgen.fair.discriminator import prediction_loss as prediction_loss
from fairgen.fair.discriminator import train_discriminator_step as train_discriminator_step
from fairgen.fair.self_paced import pseudo_labels as pseudo_labels
from fairgen.fair.self_paced import update_self_paced as update_self_paced
