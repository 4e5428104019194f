from future.utils import with_metaclass

from .compat import json
from .exceptions import FieldError, ValidationError
from .fields import Field

__all__ = ['Definition']


class DefinitionMeta(type):
    def __new__(mcs, name, bases, d):
        d['_fields'] = fields = {}
        d['__slots__'] = {'_init', '_data'}

        if name in ['Definition']:
            return type.__new__(mcs, name, bases, d)

        # load all fields from any base classes so blocks can be extended
        odict = {}

        for ocls in reversed(bases):
            f = getattr(ocls, '_fields', None)
            if f is not None:
                odict.update(f)
        odict.update(d)

        for attr, col in odict.items():
            if isinstance(col, Field):
                if attr.startswith('_'):
                    raise FieldError('field names may not start with an '
                                     'underscore: %s.%s' % (name, attr))
                col.attr = attr
                col.model = name
                fields[attr] = col

        return type.__new__(mcs, name, bases, d)


class Definition(with_metaclass(DefinitionMeta, object)):
    """
    Base class for config blocks. Subclass it and declare fields::

        class Region(Definition):
            lower = FloatListField(required=True)
            upper = FloatListField(required=True)

    Construction checks every field and then ``check_()``; all problems are
    collected and raised together as one
    :class:`~gibbsbd.exceptions.ValidationError`::

        region = Region(lower=[0.0], upper=[1.0])
        region = Region.from_dict(toml_table)
    """

    def __init__(self, **kwargs):
        self._init = False
        self._data = {}
        errors = []

        for key in sorted(set(kwargs) - set(self._fields)):
            errors.append((key, 'unknown field'))

        for attr in sorted(self._fields):
            try:
                setattr(self, attr, kwargs.get(attr, None))
            except ValidationError as e:
                errors.extend(e.errors)
            except FieldError as e:
                errors.append((attr, str(e)))

        if not errors:
            errors.extend(self.check_())
        if errors:
            raise ValidationError(errors)

        self._init = True

    def check_(self):
        """Cross-field checks; return a list of ``(path, message)``."""
        return []

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ValidationError([(cls.__name__, 'expected a table of '
                                                  'fields, got %r' % (data,))])
        return cls(**data)

    def to_dict(self):
        """The resolved values, nested blocks included, without Nones."""
        out = {}
        for attr, col in self._fields.items():
            value = self._data.get(attr)
            if value is not None:
                out[attr] = col.export(value)
        return out

    def __iter__(self):
        """
        supports coercing the object into a dictionary.
        Returns: generator
        """
        for k, v in self._data.items():
            yield k, v

    def __eq__(self, other):
        if not isinstance(other, Definition):
            return NotImplemented
        return type(self) is type(other) and self.to_dict() == other.to_dict()

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    __hash__ = None

    @property
    def __dict__(self):
        return dict(self._data)

    def __str__(self):
        return "<%s>" % self.__class__.__name__

    def __repr__(self):
        return json.dumps({self.__class__.__name__: self.to_dict()},
                          sort_keys=True)
