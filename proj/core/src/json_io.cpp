namespace dcnet {}
