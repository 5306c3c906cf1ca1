"""Python bindings for the retain recommendation engine."""

import json
from fractions import Fraction

from . import _retain
from ._retain import RetainError

__all__ = [
    "RetainError",
    "load_bank",
    "validate_bank",
    "read_log",
    "extract_features",
    "dice",
    "answer_query",
    "recommend_next",
    "repetition_schedule",
    "grade",
    "simulate",
]


def _answer_records(events):
    out = []
    for e in events:
        r = dict(e)
        r.setdefault("type", "answer")
        out.append(r)
    return json.dumps(out)


def _banks(banks):
    if isinstance(banks, dict):
        banks = [banks]
    return json.dumps(list(banks))


def load_bank(path):
    return json.loads(_retain.load_bank(str(path)))


def validate_bank(bank):
    _retain.validate_bank(json.dumps(bank))


def read_log(path):
    return json.loads(_retain.read_log(str(path)))


def extract_features(text):
    return set(_retain.extract_features(text))


def dice(a, b):
    n, d = _retain.dice(set(a), set(b))
    return Fraction(n, d)


def answer_query(query, banks, k=5, app=None):
    return json.loads(_retain.answer_query(query, _banks(banks), k, app))


def recommend_next(events, current, universe, now, neighbor_count=1, cooldown=None,
                   denominator="current_session"):
    # cooldown maps question id -> ISO-8601 expiry
    return json.loads(_retain.recommend_next(
        _answer_records(events), current, set(universe), neighbor_count,
        dict(cooldown or {}), now, denominator))


def repetition_schedule(events, banks, user, now, feedback=(), use_importance_complexity=True,
                        max_results=10, complexity_floor=0.01, basis="any_answer"):
    records = json.loads(_answer_records(events))
    records += [dict(f, type="feedback") for f in feedback]
    return json.loads(_retain.repetition_schedule(
        json.dumps(records), _banks(banks), user, now, use_importance_complexity,
        max_results, complexity_floor, basis))


def grade(question, response):
    return _retain.grade(json.dumps(question), json.dumps(response))


def simulate(users=50, questions=40, seed=7, horizon=3.0, k=3):
    return json.loads(_retain.simulate(users, questions, seed, horizon, k))
