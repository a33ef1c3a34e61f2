import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from emodist.lexicon import EmojiEntry, EmotionCategory, Lexicon, default_lexicon_path, load_lexicon

settings.register_profile(
    "default", max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def lexicon():
    return load_lexicon(default_lexicon_path())


@pytest.fixture
def toy_lexicon():
    """Three entries: anger -5, sadness -3, joy +3."""
    return Lexicon([
        EmojiEntry((0x2639,), EmotionCategory.ANGER, -5),
        EmojiEntry((0x1F494,), EmotionCategory.SADNESS, -3),
        EmojiEntry((0x1F60A,), EmotionCategory.JOY, 3),
    ])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
