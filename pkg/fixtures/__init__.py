# fixtures package
