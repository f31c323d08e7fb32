# (C) Copyright 2026 emergelib contributors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

# Created on Oct 15, 2026
import os
import re
import tempfile
import unittest
from dataclasses import replace

import numpy as np
import pandas as pd
from matplotlib.figure import Figure

from emergelib.analysis import (plot_word_counts, plot_symbol_stream_histogram, plot_reward_curves,
                                plot_trajectory_frame, render_episode, save_svg, lookup_name,
                                figure_file_name, symbol_stream_histogram)
from emergelib.analysis.plots import (WORD_COUNTS_PLOT, SYMBOL_STREAM_PLOT, REWARD_CURVES_PLOT,
                                      TRAJECTORY_FRAME_PLOT, SILENCE_GLYPH, utterance_label)
from emergelib.env import EpisodeSpec, COMM
from emergelib.policy import PolicyParams
from emergelib.training import TrainConfig, evaluate

SILENCE_SPELLINGS = (SILENCE_GLYPH, "&#8230;", "&#x2026;")


class TestPlots(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.spec = EpisodeSpec(n_agents=2, n_landmarks=3, vocab_size=4, horizon=3, mode=COMM)
        config = TrainConfig(spec=cls.spec, batch_size=2, hidden=8, features=6, memory=3)
        params = PolicyParams.initialize(4, np.random.default_rng(0), hidden=8, features=6, memory=3)
        cls.records = evaluate(params, cls.spec, episodes=2, config=config).records

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmp.cleanup()

    def svg_text(self, ax, name="plot.svg"):
        path = save_svg(ax, os.path.join(self.tmp.name, name))
        with open(path, "r", encoding="utf-8") as f:
            return f.read()

    def test_lookup_name(self):
        self.assertIs(lookup_name(WORD_COUNTS_PLOT), plot_word_counts)
        self.assertIs(lookup_name(SYMBOL_STREAM_PLOT), plot_symbol_stream_histogram)
        self.assertIs(lookup_name(REWARD_CURVES_PLOT), plot_reward_curves)
        self.assertIs(lookup_name(TRAJECTORY_FRAME_PLOT), plot_trajectory_frame)
        with self.assertRaises(KeyError):
            lookup_name("pie_chart")
        self.assertEqual(figure_file_name(SYMBOL_STREAM_PLOT), "symbol-stream.svg")
        self.assertEqual(figure_file_name(REWARD_CURVES_PLOT), "reward-curves.svg")

    def test_frame_has_one_element_per_entity(self):
        record = self.records[0]
        svg = self.svg_text(plot_trajectory_frame(record, 1))
        ids = re.findall(r'id="entity-(\d+)"', svg)
        self.assertEqual(sorted(int(i) for i in ids), list(range(record.n_agents + record.n_landmarks)))
        self.assertEqual(len(re.findall(r'id="utterance-\d+"', svg)), record.n_agents)

    def test_silence_is_drawn_as_ellipsis(self):
        record = replace(self.records[0], symbols=np.zeros_like(self.records[0].symbols))
        svg = self.svg_text(plot_trajectory_frame(record, 0))
        self.assertTrue(any(spelling in svg for spelling in SILENCE_SPELLINGS))
        self.assertEqual(utterance_label(0), SILENCE_GLYPH)
        self.assertEqual(utterance_label(3), "3")

    def test_frame_out_of_range(self):
        for t in (-1, self.records[0].horizon):
            with self.subTest(t=t):
                with self.assertRaises(IndexError):
                    plot_trajectory_frame(self.records[0], t)

    def test_output_is_byte_identical(self):
        record = self.records[1]
        first = self.svg_text(plot_trajectory_frame(record, 2), "first.svg")
        second = self.svg_text(plot_trajectory_frame(record, 2), "second.svg")
        self.assertEqual(first, second)
        self.assertNotIn("<dc:date>", first)

    def test_render_episode(self):
        record = self.records[1]
        paths = render_episode(record, os.path.join(self.tmp.name, "frames"))
        self.assertEqual(len(paths), record.horizon)
        self.assertEqual([os.path.basename(p) for p in paths],
                         [f"frame-{record.episode:04d}-{t:03d}.svg" for t in range(record.horizon)])
        self.assertTrue(all(os.path.getsize(p) > 0 for p in paths))

    def test_symbol_stream_histogram(self):
        histogram = symbol_stream_histogram(self.records)
        ax = plot_symbol_stream_histogram(histogram)
        self.assertEqual(len(ax.images), 1)
        self.assertEqual(len(plot_symbol_stream_histogram(symbol_stream_histogram([])).images), 0)

    def test_word_counts(self):
        curves = {"1x2x3": pd.Series([10, 6, 4], index=[0, 50, 100]),
                  "1x1x3": pd.Series([10, 8, 3], index=[0, 50, 100])}
        ax = plot_word_counts(curves)
        self.assertEqual(len(ax.lines), 2)
        self.assertEqual([t.get_text() for t in ax.get_legend().get_texts()], ["1x1x3", "1x2x3"])

    def test_reward_curves_on_given_axes(self):
        ax = Figure().add_subplot(1, 1, 1)
        metrics = pd.DataFrame({"r_total": [-2.0, -1.5], "r_phys": [-1.8, -1.2]},
                               index=pd.Index([0, 1], name="iter"))
        self.assertIs(plot_reward_curves(metrics, ax=ax), ax)
        self.assertEqual(len(ax.lines), 2)


if __name__ == "__main__":
    unittest.main()
