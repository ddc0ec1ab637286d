"""Walk sampling (biased walks, label-informed context) and diffusion-core analysis."""

from fairgen.sampler.diffusion import diffusion_core as diffusion_core
from fairgen.sampler.diffusion import escape_probability as escape_probability
from fairgen.sampler.diffusion import outside_probability as outside_probability
from fairgen.sampler.diffusion import verify_lemma_bound as verify_lemma_bound
from fairgen.sampler.walks import biased_walk as biased_walk
from fairgen.sampler.walks import noise_walks as noise_walks
from fairgen.sampler.walks import sample_context as sample_context
