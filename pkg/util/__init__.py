# util package
