"""
Domain services: model core, metrics, constructions, bound lab, training and artifacts.
"""
