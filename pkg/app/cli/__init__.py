"""Init file for cli package"""
