"""
Module that contains Tape and Node classes of reverse-mode differentiation
"""
import numpy as np
from core.kernel.matrix import Matrix, Precision
from core.utils.errors import NotScalarError, ShapeMismatchError


class Node():
    """
    Value recorded on a tape
    Nodes are created only by Tape and by functions in core.kernel.ops
    """

    __slots__ = ('tape', 'index', 'value', 'name')

    def __init__(self, tape, index, value, name=None):
        self.tape = tape
        self.index = index
        self.value = value
        self.name = name

    @property
    def shape(self):
        """
        Shape of the value
        """
        return self.value.shape

    @property
    def rows(self):
        """
        Number of rows of the value
        """
        return self.value.shape[0]

    @property
    def cols(self):
        """
        Number of columns of the value
        """
        return self.value.shape[1]

    def matrix(self):
        """
        Value as an immutable Matrix
        """
        return Matrix(self.value, self.tape.precision)

    def __repr__(self):
        label = f' {self.name}' if self.name else ''
        return f'Node(#{self.index}{label}, {self.shape[0]}x{self.shape[1]})'


class Tape():
    """
    Ordered record of primitive operations
    Every recorded node keeps references to its parents and a function that maps
    the adjoint of the node to adjoints of the parents.
    Nodes are appended in evaluation order, so walking the list backwards is a
    reverse topological order.
    A tape belongs to one thread of control.
    """

    def __init__(self, precision=Precision.SINGLE):
        self.precision = Precision.parse(precision)
        self.dtype = self.precision.dtype
        self.nodes = []
        self.__parents = []
        self.__backward = []
        self.__adjoints = []
        self.__parameters = {}
        self.__gradients = {}

    def __len__(self):
        return len(self.nodes)

    def __as_array(self, value):
        if isinstance(value, Matrix):
            value = value.data

        array = np.array(value, dtype=self.dtype)
        if array.ndim != 2:
            raise ShapeMismatchError(f'Tape values must be two dimensional, got {array.shape}')

        return array

    def record(self, value, parents=(), backward=None, name=None):
        """
        Append a node, parents must be nodes of this tape
        backward(adjoint) must return one gradient per parent (None for no gradient)
        """
        for parent in parents:
            if parent.tape is not self:
                raise ShapeMismatchError(f'{parent} belongs to a different tape')

        node = Node(self, len(self.nodes), value, name)
        self.nodes.append(node)
        self.__parents.append(tuple(parents))
        self.__backward.append(backward)
        self.__adjoints.append(None)
        return node

    def constant(self, value, name=None):
        """
        Record a value that does not need a gradient
        """
        return self.record(self.__as_array(value), name=name)

    def parameter(self, name, value):
        """
        Record a leaf whose gradient can be retrieved by name
        """
        if name in self.__parameters:
            raise ShapeMismatchError(f'Parameter {name} is already on the tape')

        node = self.record(self.__as_array(value), name=name)
        self.__parameters[name] = node
        return node

    def parameters(self):
        """
        Dictionary of parameter names and nodes
        """
        return dict(self.__parameters)

    def reset(self):
        """
        Zero all adjoints
        """
        self.__adjoints = [None] * len(self.nodes)

    def backward(self, loss, accumulate=False):
        """
        Populate adjoints by a reverse sweep from a 1x1 loss node
        and return gradients of all parameters.
        Adjoints are always recomputed from zero. With accumulate=True parameter
        gradients of this sweep are added to the ones of the previous call.
        """
        if loss.tape is not self:
            raise ShapeMismatchError(f'{loss} belongs to a different tape')

        if loss.shape != (1, 1):
            raise NotScalarError(f'Loss must be 1x1, got {loss.shape[0]}x{loss.shape[1]}')

        previous = self.__gradients if accumulate else {}
        self.reset()
        adjoints = self.__adjoints
        adjoints[loss.index] = np.ones((1, 1), dtype=self.dtype)
        for index in range(loss.index, -1, -1):
            adjoint = adjoints[index]
            backward = self.__backward[index]
            if adjoint is None or backward is None:
                continue

            parents = self.__parents[index]
            gradients = backward(adjoint)
            for parent, gradient in zip(parents, gradients):
                if gradient is None:
                    continue

                if adjoints[parent.index] is None:
                    adjoints[parent.index] = gradient
                else:
                    adjoints[parent.index] = adjoints[parent.index] + gradient

        gradients = {}
        for name, node in self.__parameters.items():
            gradients[name] = self.adjoint(node)
            if name in previous:
                gradients[name] = gradients[name] + previous[name]

        self.__gradients = gradients
        return dict(gradients)

    def adjoint(self, node):
        """
        Adjoint of any node from the last sweep, zero if the loss does not depend on it
        """
        adjoint = self.__adjoints[node.index]
        if adjoint is None:
            return np.zeros(node.shape, dtype=self.dtype)

        return np.array(adjoint, dtype=self.dtype)

    def gradient(self, parameter):
        """
        Gradient of a parameter node or name, including accumulated sweeps
        Zero before the first sweep
        """
        name = parameter.name if isinstance(parameter, Node) else parameter
        node = self.__parameters.get(name)
        if node is None or (isinstance(parameter, Node) and node is not parameter):
            raise ShapeMismatchError(f'{parameter} is not a parameter of this tape')

        if name in self.__gradients:
            return np.array(self.__gradients[name], dtype=self.dtype)

        return np.zeros(node.shape, dtype=self.dtype)
