import hashlib
import json
import logging
import os
from dataclasses import dataclass, field, asdict

import numpy as np

from ordered_graph_bench.Graph import INFINITE_DISTANCE
from ordered_graph_bench.algorithms import CorenessResult, DistanceResult, SetCoverResult, SsspResult

REPORT_SCHEMA = 1


@dataclass
class RunReport:
    algorithm: str
    graph: dict
    schedule: dict
    threads: int
    wall_ms: float
    stats: dict
    digest: str
    queries: list = field(default_factory=list)

    def to_dict(self):
        values = asdict(self)
        values["schema"] = REPORT_SCHEMA
        return values


def result_digest(values):
    """
    64-bit BLAKE2b digest of a result vector
    """
    data = np.ascontiguousarray(np.asarray(values, dtype='<i8')).tobytes()
    return hashlib.blake2b(data, digest_size=8).hexdigest()


def format_distance(d):
    return "inf" if d >= INFINITE_DISTANCE else str(d)


class ReportSaver(object):
    """
    Writes canonical result files and json reports
    """

    def __init__(self, logger=None):
        if logger is not None:
            self.logger = logger
        else:
            self.logger = logging

    def _ensure_dir(self, path):
        directory = os.path.dirname(os.path.abspath(path))
        if os.path.isdir(directory) is False:
            os.makedirs(directory)
            self.logger.warning("ReportSaver: directory {} does not exist, creating path".format(directory))

    @staticmethod
    def result_lines(result):
        """
        Canonical text form of a result
        :return: list of lines without newlines
        """
        if isinstance(result, SsspResult):
            return ["{} {}".format(v, format_distance(d)) for v, d in enumerate(result.distances.tolist())]
        if isinstance(result, DistanceResult):
            return ["{} {}".format(result.target, format_distance(result.distance))]
        if isinstance(result, CorenessResult):
            return ["{} {}".format(v, k) for v, k in enumerate(result.coreness.tolist())]
        if isinstance(result, SetCoverResult):
            lines = [str(s) for s in result.chosen_sets.tolist()]
            lines += ["# uncoverable {}".format(e) for e in result.uncoverable.tolist()]
            return lines
        raise TypeError("cannot format {}".format(type(result).__name__))

    def save_results(self, path, results):
        """
        Write one or more results; several results are separated by '# source <s>' lines
        :param path: destination file
        :param results: list of (source or None, result)
        """
        self._ensure_dir(path)
        with open(path, 'w') as f:
            for source, result in results:
                if len(results) > 1:
                    f.write("# source {}\n".format(source))
                for line in self.result_lines(result):
                    f.write(line + "\n")
        self.logger.info("ReportSaver: saved results to " + path)
        return path

    def save_json(self, path, values):
        self._ensure_dir(path)
        if "schema" not in values:
            values = dict(values, schema=REPORT_SCHEMA)
        with open(path, 'w') as f:
            contents = json.dumps(values, sort_keys=True, indent=4, separators=(',', ': '))
            f.write(contents)
        self.logger.info("ReportSaver: saved report to " + path)
        return path

    def save_report(self, path, report):
        return self.save_json(path, report.to_dict())
