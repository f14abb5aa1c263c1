"""Init file for app package"""
