from medul.cli import main

main()
