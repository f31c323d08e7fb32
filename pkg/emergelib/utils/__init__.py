from .random_streams import RandomStreams, EpisodeNoise, SITES
