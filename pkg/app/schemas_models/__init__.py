"""Init file for schemas package"""
