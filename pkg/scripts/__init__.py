"""
Scripts de utilidad para la odometría por radar
"""
