"""
Tests para la odometría por radar
"""
