"""
Module that contains custom errors for the navigation application
"""

class NavigationException(Exception):
    def __init__(self, message:str):
        super().__init__(message)
        self._message = message
    @property
    def message(self):
        return self._message

# subclasses here, as needed:
class InvalidAttribute(NavigationException):
    def __init__(self, message: str, attribute:str):
        super().__init__(message)
        self._attribute = attribute
    @property
    def attribute(self):
        return self._attribute

class MethodError(NavigationException):
    def __init__(self, message: str, error:str):
        super().__init__(message)
        self._error = error
    @property
    def error(self):
        return self._error

# DIFFCORE errors
class DimensionError(NavigationException):
    def __init__(self, message: str, shapes: tuple):
        super().__init__(message)
        self._shapes = shapes
    @property
    def shapes(self):
        return self._shapes

class NumericError(NavigationException):
    def __init__(self, message: str, name: str):
        super().__init__(message)
        self._name = name
    @property
    def name(self):
        return self._name

class BackwardError(NavigationException):
    pass

class OutOfRangeError(NavigationException, IndexError):
    def __init__(self, message: str, index: int):
        super().__init__(message)
        self._index = index
    @property
    def index(self):
        return self._index

# GRIDWORLD errors
class SceneGenerationError(NavigationException):
    pass

class ProtocolError(NavigationException):
    pass

class PlanningError(NavigationException):
    def __init__(self, message: str, scene_id: str, target: int):
        super().__init__(message)
        self._scene_id = scene_id
        self._target = target
    @property
    def scene_id(self):
        return self._scene_id
    @property
    def target(self):
        return self._target

# NAVPOLICY and TPN errors
class EmptyInputError(NavigationException):
    pass

# HARNESS errors
class TraceMismatchError(NavigationException):
    pass

class ScenesOverlapError(NavigationException):
    def __init__(self, message: str, scene_ids: list):
        super().__init__(message)
        self._scene_ids = scene_ids
    @property
    def scene_ids(self):
        return self._scene_ids

class CheckpointError(NavigationException):
    def __init__(self, message: str, path_file: str):
        super().__init__(message)
        self._path_file = path_file
    @property
    def path_file(self):
        return self._path_file

class CheckpointVersionError(CheckpointError):
    def __init__(self, message: str, path_file: str, version: int):
        super().__init__(message, path_file)
        self._version = version
    @property
    def version(self):
        return self._version

class ChecksumError(CheckpointError):
    def __init__(self, message: str, path_file: str):
        super().__init__(message, path_file)

class TpnMissingError(CheckpointError):
    def __init__(self, message: str, path_file: str):
        super().__init__(message, path_file)

# CONFIGURATION errors
class InvalidConfigAttr(InvalidAttribute):
    def __init__(self, message: str, attribute: str):
        super().__init__(message, attribute)

class InvalidConfigFile(NavigationException):
    def __init__(self, message:str, path_file:str):
        super().__init__(message)
        self._path_file = path_file
    @property
    def path_file(self):
        return self._path_file

class ConfigParseError(MethodError):
    def __init__(self, message: str, error: str):
        super().__init__(message, error)

class SceneFileError(NavigationException):
    def __init__(self, message:str, path_file:str):
        super().__init__(message)
        self._path_file = path_file
    @property
    def path_file(self):
        return self._path_file
