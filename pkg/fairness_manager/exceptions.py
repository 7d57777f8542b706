# -*- coding: utf-8 -*-


class FairnessManagerException(Exception):
    pass


class ConfigurationException(FairnessManagerException):
    pass


class UsageException(FairnessManagerException):
    pass


# dataset


class DatasetException(FairnessManagerException):
    pass


class MissingColumn(DatasetException):
    def __init__(self, column):
        self.column = column
        super(MissingColumn, self).__init__(
            "column '{}' is declared in the schema but missing".format(column))


class _CellException(DatasetException):
    reason = "bad value"

    def __init__(self, row, col, value=None):
        self.row = row
        self.col = col
        self.value = value
        message = "{} at row {} column '{}'".format(self.reason, row, col)
        if value is not None:
            message += ": {!r}".format(value)
        super(_CellException, self).__init__(message)


class UnparsableValue(_CellException):
    reason = "unparsable value"


class MissingValue(_CellException):
    reason = "missing value"


class EmptyFile(DatasetException):
    pass


class DegenerateSplit(DatasetException):
    pass


class BadK(DatasetException):
    pass


class NotSensitive(DatasetException):
    def __init__(self, column):
        self.column = column
        super(NotSensitive, self).__init__(
            "column '{}' does not have the sensitive role".format(column))


class NoSliceColumn(DatasetException):
    pass


class NoSuchColumn(DatasetException):
    def __init__(self, column):
        self.column = column
        super(NoSuchColumn, self).__init__(
            "no column named '{}'".format(column))


class SchemaException(DatasetException):
    pass


# biasgen


class BiasSpecException(FairnessManagerException):
    pass


class BadSpec(BiasSpecException, ConfigurationException):
    pass


class TooFewRows(BiasSpecException):
    pass


# metrics


class MetricException(FairnessManagerException):
    pass


class LengthMismatch(MetricException):
    def __init__(self, *lengths):
        self.lengths = lengths
        super(LengthMismatch, self).__init__(
            "vectors have different lengths: {}".format(list(lengths)))


class EmptyGroup(MetricException):
    def __init__(self, group):
        self.group = group
        super(EmptyGroup, self).__init__(
            "group {!r} has no rows".format(group))


class UndefinedRate(MetricException):
    def __init__(self, group, kind):
        self.group = group
        self.kind = kind
        super(UndefinedRate, self).__init__(
            "{} rate undefined for group {!r}".format(kind, group))


class NonBinarySensitive(MetricException):
    pass


# fftree


class TreeException(FairnessManagerException):
    pass


class CountMismatch(TreeException):
    pass


class NoSensitiveColumn(TreeException):
    pass


class UnencodedData(TreeException):
    pass


class EncodingMismatch(TreeException):
    pass


class BadNodeId(TreeException):
    def __init__(self, node_id):
        self.node_id = node_id
        super(BadNodeId, self).__init__(
            "node {!r} is not an internal node".format(node_id))


# mitigate


class MitigationException(FairnessManagerException):
    pass


class AllFeaturesDropped(MitigationException):
    pass


class ScoreLengthMismatch(MitigationException):
    pass


class EmptyCell(MitigationException):
    def __init__(self, group, label):
        self.group = group
        self.label = label
        super(EmptyCell, self).__init__(
            "no rows with group {!r} and label {}".format(group, label))


class NonFiniteLoss(MitigationException):
    pass


class UnachievableEpsilon(MitigationException):
    pass


class UnknownGroup(MitigationException):
    def __init__(self, key):
        self.key = key
        super(UnknownGroup, self).__init__(
            "policy has no threshold for {!r}".format(key))


# compare


class ComparisonException(FairnessManagerException):
    pass


class BadBeta(ComparisonException):
    pass


class MissingMetric(ComparisonException):
    def __init__(self, model_id, key):
        self.model_id = model_id
        self.key = key
        super(MissingMetric, self).__init__(
            "model '{}' has no metric '{}'".format(model_id, key))


# contrast


class ContrastException(FairnessManagerException):
    pass


class GroupTooSmall(ContrastException):
    pass


class UnknownColumn(ContrastException):
    pass


# monitor


class MonitorException(FairnessManagerException):
    pass


class NonNumericColumn(MonitorException):
    pass


class UnknownClass(MonitorException):
    pass


class NotIndividuallyFair(MonitorException):
    pass


class TooManyFeatures(MonitorException):
    pass


class EmptyBackground(MonitorException):
    pass


class ViewMismatch(MonitorException):
    pass
