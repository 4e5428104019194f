import numbers

import future.builtins
import six

from .compat import json
from .exceptions import InvalidFieldValue, MissingField, ValidationError

__all__ = '''
Field
IntegerField
FloatField
StringField
FloatListField
ListField
BooleanField
BlockField
'''.split()


NULL = object()

_SCALAR = (str, six.text_type, future.builtins.str)


class Field(object):
    """
    Field objects check and convert the values of a config block as they are
    assigned, so a bad value in a config file is reported against the exact
    field it was written to rather than deep inside an experiment.

    Standard Arguments:

        * *required* - determines whether this field must be given
        * *default* - a default value (either a callable or a simple value)
          when this field is not provided
        * *choices* - the only values the field accepts
        * *minimum* / *maximum* - inclusive numeric bounds

    Notes:

        * If you set required to True, then the field must be present when
          the block is built: ``MyBlock(col=val)``
        * A default never goes through validation; keep defaults sensible
    """
    _allowed = ()

    __slots__ = 'required default choices minimum maximum model attr'.split()

    def __init__(self, required=False, default=NULL, choices=None,
                 minimum=None, maximum=None):
        self.required = required
        self.default = default
        self.choices = tuple(choices) if choices is not None else None
        self.minimum = minimum
        self.maximum = maximum
        self.model = None
        self.attr = None

    @property
    def _allowed_types(self):
        return self._allowed if isinstance(self._allowed, (tuple, list)) \
            else [self._allowed]

    def _is_allowed(self, value):
        if value is None:
            return True
        if isinstance(value, bool) and bool not in self._allowed_types:
            return False
        for a in self._allowed_types:
            if isinstance(value, a):
                return True
        return False

    def convert(self, value):
        return value

    def validate(self, value):
        if value is None:
            if self.required:
                raise MissingField('%s.%s is required' %
                                   (self.model, self.attr))
            return

        if not self._is_allowed(value):
            raise InvalidFieldValue(
                "%s.%s has type %r but must be of type %r" % (
                    self.model, self.attr, type(value), self._allowed_types))

        if self.choices is not None and value not in self.choices:
            raise InvalidFieldValue('%s.%s is %r but must be one of %s' % (
                self.model, self.attr, value,
                ', '.join(repr(c) for c in self.choices)))
        if self.minimum is not None and value < self.minimum:
            raise InvalidFieldValue('%s.%s is %r but must be >= %r' % (
                self.model, self.attr, value, self.minimum))
        if self.maximum is not None and value > self.maximum:
            raise InvalidFieldValue('%s.%s is %r but must be <= %r' % (
                self.model, self.attr, value, self.maximum))

    def _init_(self, obj, value):
        # called once per field while the block is constructed
        if value is None:
            default = self.default
            if default is NULL:
                if self.required:
                    raise MissingField(
                        "%s.%s cannot be missing" % (self.model, self.attr)
                    )
            elif callable(default):
                # noinspection PyCallingNonCallable
                value = default()
            else:
                value = self.default
        else:
            self.validate(value)
            value = self.convert(value)

        obj._data[self.attr] = value

    def __set__(self, obj, value):
        if not getattr(obj, '_init', False):
            self._init_(obj, value)
            return

        self.validate(value)
        obj._data[self.attr] = None if value is None else self.convert(value)

    def __get__(self, obj, _):
        if obj is None:
            return self
        try:
            return obj._data[self.attr]
        except KeyError:
            raise AttributeError("%s.%s does not exist" % (self.model,
                                                           self.attr))

    def export(self, value):
        return value


class BooleanField(Field):
    _allowed = bool

    def __init__(self, default=False):
        super(BooleanField, self).__init__(default=default)


class FloatField(Field):
    _allowed = (float, int)

    def convert(self, value):
        return float(value)


class IntegerField(Field):
    _allowed = six.integer_types


class ListField(Field):
    _allowed = (list, tuple)

    def convert(self, value):
        return json.loads(json.dumps(list(value)))


class FloatListField(ListField):
    """A list of numbers, stored as floats."""

    def validate(self, value):
        super(FloatListField, self).validate(value)
        if value is None:
            return
        for v in value:
            if isinstance(v, bool) or not isinstance(v, numbers.Real):
                raise InvalidFieldValue('%s.%s must hold numbers, got %r' % (
                    self.model, self.attr, v))

    def convert(self, value):
        return [float(v) for v in value]


class StringField(Field):
    _allowed = _SCALAR


class BlockField(Field):
    """
    A nested block: a dict in the config file that is built into an
    instance of ``definition``. Errors inside the block are reported with
    the block name as a path prefix.
    """

    __slots__ = ('definition',)

    def __init__(self, definition, required=False, default=NULL):
        super(BlockField, self).__init__(required=required, default=default)
        self.definition = definition

    def _is_allowed(self, value):
        return value is None or isinstance(value, (dict, self.definition))

    def convert(self, value):
        if isinstance(value, self.definition):
            return value
        try:
            return self.definition(**value)
        except ValidationError as e:
            raise ValidationError(
                ('%s.%s' % (self.attr, path), msg) for path, msg in e.errors)

    def _init_(self, obj, value):
        if value is None and self.default is not NULL:
            default = self.default() if callable(self.default) \
                else self.default
            value = default if default is None else self.convert(default)
            obj._data[self.attr] = value
            return
        super(BlockField, self)._init_(obj, value)

    def export(self, value):
        return None if value is None else value.to_dict()

