# -*- coding=utf-8 -*-
import logging
from abc import abstractmethod

from .params import DEFAULTS

logger = logging.getLogger(__name__)


class Event(object):
    STEP = "STEP"
    FINISHED = "FINISHED"


class AbstractListener(object):
    def __init__(self, listener_name):
        self._listener_name = listener_name

    @property
    def listener_name(self):
        return self._listener_name

    @abstractmethod
    def launch(self, event, record=None):
        pass


class FunctionListener(AbstractListener):
    """Calls ``fn(event, record)`` for every solver event."""

    def __init__(self, fn, listener_name):
        super(FunctionListener, self).__init__(listener_name)
        self._fn = fn

    def launch(self, event, record=None):
        self._fn(event, record)


class TrajectoryRecorder(AbstractListener):
    """
    Keeps every STEP record up to ``thin_after`` steps, then every
    ``thin_every``-th one. The FINISHED record is always kept.
    """

    def __init__(self, listener_name="trajectory", thin_after=None, thin_every=None):
        super(TrajectoryRecorder, self).__init__(listener_name)
        self.thin_after = DEFAULTS["THIN_AFTER"] if thin_after is None else thin_after
        self.thin_every = DEFAULTS["THIN_EVERY"] if thin_every is None else thin_every
        self.records = []

    def launch(self, event, record=None):
        if record is None:
            return
        if event == Event.FINISHED:
            if not self.records or self.records[-1].k != record.k:
                self.records.append(record)
            return
        if record.k <= self.thin_after or record.k % self.thin_every == 0:
            self.records.append(record)


class SimpleListenerManager(object):

    def __init__(self):
        # listener_name --> listener
        self._listeners = dict()

    def all_listeners(self):
        return self._listeners

    def add_listener(self, listener):
        if listener.listener_name in self._listeners:
            logger.debug("[listener] replacing listener:%s" % listener.listener_name)
        self._listeners[listener.listener_name] = listener
        return self

    def remove_listener(self, listener_name):
        self._listeners.pop(listener_name, None)
        return self

    def do_launch(self, event, record=None):
        for listener in self._listeners.values():
            listener.launch(event, record)
