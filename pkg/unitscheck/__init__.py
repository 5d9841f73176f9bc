__all__ = [
    'analysis', 'constraints', 'errors', 'frontend', 'reporting', 'solver',
    'units'
]
