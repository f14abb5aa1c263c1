"""Subcomandos de la CLI"""
