"""The incremental horizon curriculum.

Training starts with episodes a quarter of the full prefix length, grows
to half of it at 25% of the total episode budget and to the full length
at the midpoint. For a short window after each expansion the sampling
temperature is raised on the newly opened steps only.
"""

import math
from collections import namedtuple

from .exceptions import ArgumentError


__all__ = ('horizon_at', 'CurriculumSchedule', 'Expansion')


Expansion = namedtuple('Expansion', ('episode', 'previous', 'horizon'))


def _stage_horizon(full_horizon, quarters):
    return -(-full_horizon * quarters // 4)


def horizon_at(episode, total_episodes, full_horizon, enabled=True):
    """Maximum episode length for training episode number ``episode``
    (counting from 0)."""
    if not enabled:
        return full_horizon
    # integer comparisons keep the 25% / 50% boundaries exact
    if 4 * episode < total_episodes:
        return _stage_horizon(full_horizon, 1)
    if 2 * episode < total_episodes:
        return _stage_horizon(full_horizon, 2)
    return full_horizon


class CurriculumSchedule(object):
    """Horizons and temperature-boost windows of one training run."""

    def __init__(self, total_episodes, full_horizon, enabled=True,
                 boost_fraction=0.05):
        if total_episodes < 1 or full_horizon < 1:
            raise ArgumentError('episode total and horizon must be positive')
        if not 0.0 <= boost_fraction < 1.0:
            raise ArgumentError('boost fraction must be in [0, 1)')
        self.total_episodes = int(total_episodes)
        self.full_horizon = int(full_horizon)
        self.enabled = enabled
        self.boost_fraction = boost_fraction
        self.expansions = self._find_expansions()

    def horizon(self, episode):
        return horizon_at(episode, self.total_episodes, self.full_horizon,
                          self.enabled)

    def _find_expansions(self):
        if not self.enabled:
            return []
        result = []
        # first episodes of the second and third stage
        for start in (-(-self.total_episodes // 4),
                      -(-self.total_episodes // 2)):
            previous, current = self.horizon(start - 1), self.horizon(start)
            if start > 0 and current > previous and \
                    all(e.episode != start for e in result):
                result.append(Expansion(start, previous, current))
        return result

    @property
    def boost_length(self):
        return math.ceil(self.boost_fraction * self.total_episodes)

    def boost_window(self, episode):
        """Return the :class:`Expansion` whose boost window contains
        ``episode``, or ``None``.

        A window never reaches past the start of the next stage.
        """
        for i, exp in enumerate(self.expansions):
            end = exp.episode + self.boost_length
            if i + 1 < len(self.expansions):
                end = min(end, self.expansions[i + 1].episode)
            if exp.episode <= episode < end:
                return exp
        return None

    def boost_from(self, episode):
        """First step that runs at the boost temperature in ``episode``,
        or ``None`` outside any boost window."""
        exp = self.boost_window(episode)
        return exp.previous if exp is not None else None

    def is_boosted(self, episode, step):
        start = self.boost_from(episode)
        return start is not None and step >= start
