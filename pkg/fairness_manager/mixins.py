from .utils import dumps, render_table, write_json, write_text


class SerializableMixin(object):
    def as_dict(self):
        raise NotImplementedError

    def to_json(self):
        return dumps(self.as_dict())

    def save_json(self, path):
        return write_json(path, self.as_dict())


class ReportMixin(SerializableMixin):
    """Reports render as JSON or as an aligned plain-text table."""

    def table_headers(self):
        raise NotImplementedError

    def table_rows(self):
        raise NotImplementedError

    def footer_lines(self):
        return []

    def render_table(self):
        text = render_table(self.table_headers(), self.table_rows())
        footer = self.footer_lines()
        if footer:
            text += '\n\n' + '\n'.join(footer)
        return text

    def render(self, fmt='table'):
        if fmt == 'json':
            return self.to_json()
        return self.render_table()

    def save(self, path, fmt='json'):
        if fmt == 'json':
            return self.save_json(path)
        return write_text(path, self.render_table())
