import random

import pytest

# 30 common Turkish nouns in grid form; used by grid generation tests.
TURKISH_WORDS = [
    "KEDİ", "KALEM", "OKUL", "KİTAP", "DENİZ", "DAĞ", "NEHİR", "GÜNEŞ",
    "YILDIZ", "GEZEGEN", "BİLGİSAYAR", "ÖĞRETMEN", "TAHTA", "SİLGİ",
    "DEFTER", "MASA", "SANDALYE", "PENCERE", "KAPI", "BAHÇE", "ÇİÇEK",
    "AĞAÇ", "ORMAN", "GÖKYÜZÜ", "BULUT", "YAĞMUR", "RÜZGAR", "TOPRAK",
    "ATEŞ", "ELMA",
]

# Skewed toward frequent Turkish letters so random words cross often.
LETTER_POOL = "AAAEEEİİIKLMNRSTUÜOÖBCÇDĞŞYZGHJPV"


def random_word(rng: random.Random, min_len: int = 2, max_len: int = 8) -> str:
    return "".join(
        rng.choice(LETTER_POOL) for _ in range(rng.randint(min_len, max_len))
    )


@pytest.fixture
def turkish_words():
    return list(TURKISH_WORDS)
