# -*- coding: utf8 -*-

import unittest

from inertial.listener import Event, FunctionListener, SimpleListenerManager, TrajectoryRecorder
from inertial.scenario import example_one
from inertial.solver import ProjectionConfig, TrajectoryRecord, projection_solve


def record(k):
    return TrajectoryRecord(k, None, 0.0, 0.0, 0.0)


class TestTrajectoryRecorder(unittest.TestCase):
    def test_thinning(self):
        recorder = TrajectoryRecorder(thin_after=10, thin_every=5)
        for k in range(31):
            recorder.launch(Event.STEP, record(k))
        self.assertEqual([r.k for r in recorder.records], list(range(11)) + [15, 20, 25, 30])

    def test_final_record_kept_once(self):
        recorder = TrajectoryRecorder(thin_after=2, thin_every=10)
        for k in range(6):
            recorder.launch(Event.STEP, record(k))
        recorder.launch(Event.FINISHED, record(5))
        self.assertEqual([r.k for r in recorder.records], [0, 1, 2, 5])
        recorder.launch(Event.FINISHED, record(5))
        self.assertEqual(len(recorder.records), 4)


class TestListenerManager(unittest.TestCase):
    def test_add_and_remove(self):
        class Share:
            events = []

        def collect(event, *args):
            Share.events.append(event)

        manager = SimpleListenerManager().add_listener(FunctionListener(collect, "collect"))
        manager.do_launch(Event.STEP, record(0))
        manager.remove_listener("collect")
        manager.do_launch(Event.STEP, record(1))
        manager.remove_listener("absent")
        self.assertEqual(Share.events, [Event.STEP])
        self.assertEqual(manager.all_listeners(), {})

    def test_solver_events(self):
        class Share:
            steps = 0
            finished = 0

        def count(event, *args):
            if event == Event.STEP:
                Share.steps += 1
            else:
                Share.finished += 1

        result = projection_solve(example_one(), [0.4, 0.2, 0.4], ProjectionConfig(1.0),
                                  listeners=[FunctionListener(count, "count")])
        self.assertEqual(Share.steps, result.iterations + 2)
        self.assertEqual(Share.finished, 1)


if __name__ == '__main__':
    unittest.main()
